#pragma once

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <numbers>

#include "sphereloc/errors.hpp"

namespace sphereloc {

/**
 * Spherical-harmonic coefficients f_l^m for 0 <= l < B, -l <= m <= l.
 *
 * Coefficients are stored column-per-channel with the flat index
 * l*l + l + m, so each column holds exactly B^2 values.
 */
template <typename Scalar_>
class SHSpectrum {
 public:
  using Scalar = Scalar_;
  using Complex = std::complex<Scalar>;
  using Coeffs = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;

  SHSpectrum() = default;

  SHSpectrum(int band_limit, int channels) : band_limit_(band_limit) {
    if (band_limit < 1) throw InvalidInput("SHSpectrum: band_limit must be >= 1");
    if (channels < 1) throw InvalidInput("SHSpectrum: channels must be >= 1");
    coeffs_ = Coeffs::Zero(static_cast<Eigen::Index>(band_limit) * band_limit, channels);
  }

  static constexpr int index(int l, int m) { return l * l + l + m; }

  int band_limit() const { return band_limit_; }
  int channels() const { return static_cast<int>(coeffs_.cols()); }

  Complex& operator()(int l, int m, int c = 0) { return coeffs_(index(l, m), c); }
  const Complex& operator()(int l, int m, int c = 0) const { return coeffs_(index(l, m), c); }

  Coeffs& coeffs() { return coeffs_; }
  const Coeffs& coeffs() const { return coeffs_; }

  /// Sum over m of |f_l^m|^2 for one degree and channel.
  Scalar degree_energy(int l, int c = 0) const {
    return coeffs_.col(c).segment(index(l, -l), 2 * l + 1).squaredNorm();
  }

  /// Sum of |f_l^m|^2 over all coefficients and channels.
  Scalar energy() const { return coeffs_.squaredNorm(); }

  bool same_shape(const SHSpectrum& o) const {
    return band_limit_ == o.band_limit_ && channels() == o.channels();
  }

  SHSpectrum& operator+=(const SHSpectrum& o) {
    if (!same_shape(o)) throw ShapeError("SHSpectrum: shape mismatch in +=");
    coeffs_ += o.coeffs_;
    return *this;
  }
  friend SHSpectrum operator+(SHSpectrum a, const SHSpectrum& b) { return a += b; }
  friend SHSpectrum operator*(Scalar s, SHSpectrum a) {
    a.coeffs_ *= s;
    return a;
  }

 private:
  int band_limit_ = 0;
  Coeffs coeffs_;
};

/// Yaw rotation about the polar axis, normalized to [0, 2 pi).
template <typename Scalar>
struct RotationZ {
  Scalar yaw = 0;

  RotationZ() = default;
  explicit RotationZ(Scalar radians) : yaw(normalize(radians)) {}

  static Scalar normalize(Scalar radians) {
    constexpr Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
    Scalar r = std::fmod(radians, two_pi);
    if (r < 0) r += two_pi;
    if (r >= two_pi) r = 0;
    return r;
  }

  /// Rotation by `steps` longitude samples of a 2B grid.
  static RotationZ grid(int steps, int band_limit) {
    return RotationZ(std::numbers::pi_v<Scalar> * Scalar(steps) / Scalar(band_limit));
  }
};

/**
 * Rotates a spectrum about the polar axis: f_l^m <- exp(-i m yaw) f_l^m.
 * The result represents the signal g(theta, phi) = f(theta, phi - yaw).
 */
template <typename Scalar>
SHSpectrum<Scalar> rotate_z(const SHSpectrum<Scalar>& spectrum, RotationZ<Scalar> rot) {
  using Complex = std::complex<Scalar>;
  SHSpectrum<Scalar> out = spectrum;
  const int b = spectrum.band_limit();
  for (int m = -(b - 1); m < b; ++m) {
    if (m == 0) continue;
    const Complex phase = std::polar(Scalar(1), -Scalar(m) * rot.yaw);
    for (int l = std::abs(m); l < b; ++l) out.coeffs().row(SHSpectrum<Scalar>::index(l, m)) *= phase;
  }
  return out;
}

}  // namespace sphereloc
