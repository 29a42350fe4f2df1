#pragma once

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "sphereloc/sphere/sh_spectrum.hpp"

namespace sphereloc {

/// Correlation sampled over the 2B yaw grid alpha_k = 2 pi k / 2B.
template <typename Scalar>
struct CorrelationProfile {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values;
  int peak_index = 0;
  Scalar peak_value = 0;

  int size() const { return static_cast<int>(values.size()); }
  Scalar step() const { return 2 * std::numbers::pi_v<Scalar> / Scalar(size()); }

  /**
   * Yaw of the peak refined by fitting a parabola through the peak sample
   * and its two circular neighbours.  The offset is clamped to half a grid
   * step; the result lies in [0, 2 pi).
   */
  Scalar refined_peak() const {
    const int n = size();
    const Scalar left = values((peak_index + n - 1) % n);
    const Scalar mid = values(peak_index);
    const Scalar right = values((peak_index + 1) % n);
    const Scalar denom = left - 2 * mid + right;
    Scalar offset(0);
    if (denom < 0) offset = std::clamp(Scalar(0.5) * (left - right) / denom, Scalar(-0.5), Scalar(0.5));
    return RotationZ<Scalar>::normalize((Scalar(peak_index) + offset) * step());
  }
};

/**
 * Correlation of two spectra over yaw:
 *   values[k] = Re sum_{l,m,c} f_l^m conj(h_l^m) e^{-i m alpha_k}
 *             = <rotate_z(f, alpha_k), h>.
 * The peak therefore sits at the yaw that rotates f onto h.  Evaluated with
 * one length-2B FFT over m.
 */
template <typename Scalar>
CorrelationProfile<Scalar> yaw_convolve(const SHSpectrum<Scalar>& f, const SHSpectrum<Scalar>& h) {
  using Complex = std::complex<Scalar>;
  if (!f.same_shape(h)) throw ShapeError("yaw_convolve: band limit or channel count mismatch");
  const int b = f.band_limit();
  const int n = 2 * b;
  Eigen::Matrix<Complex, Eigen::Dynamic, 1> bins = Eigen::Matrix<Complex, Eigen::Dynamic, 1>::Zero(n);
  for (int l = 0; l < b; ++l) {
    for (int m = -l; m <= l; ++m) {
      // f * conj(h), summed over channels
      Complex acc(0);
      for (int c = 0; c < f.channels(); ++c) acc += f(l, m, c) * std::conj(h(l, m, c));
      bins((m + n) % n) += acc;
    }
  }
  Eigen::FFT<Scalar> fft;
  Eigen::Matrix<Complex, Eigen::Dynamic, 1> out(n);
  fft.fwd(out, bins);
  CorrelationProfile<Scalar> profile;
  profile.values = out.real();
  Eigen::Index peak = 0;
  profile.peak_value = profile.values.maxCoeff(&peak);
  profile.peak_index = static_cast<int>(peak);
  return profile;
}

}  // namespace sphereloc
