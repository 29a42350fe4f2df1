#pragma once

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "sphereloc/sphere/sh_spectrum.hpp"
#include "sphereloc/sphere/spherical_image.hpp"

namespace sphereloc {

/**
 * Discrete spherical-harmonic transform on the 2B x 2B equiangular grid.
 *
 * Orthonormal harmonics with the Condon-Shortley phase:
 *   Y_l^m(theta, phi) = lambda_l^m(cos theta) e^{i m phi},
 *   Y_l^{-m} = (-1)^m conj(Y_l^m).
 * The colatitude quadrature is Fejer's first rule on the 2B Chebyshev
 * nodes, which integrates polynomials in cos(theta) of degree < 2B exactly;
 * together with the 2B-point longitude sum this makes the forward transform
 * exact for band-limited input.
 *
 * A transform object is immutable after construction and safe to share.
 */
template <typename Scalar_>
class ShTransform {
 public:
  using Scalar = Scalar_;
  using Complex = std::complex<Scalar>;
  using Image = SphericalImage<Scalar>;
  using Spectrum = SHSpectrum<Scalar>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
  using ComplexVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

  explicit ShTransform(int band_limit) : band_limit_(band_limit) {
    if (band_limit < 1) throw InvalidInput("ShTransform: band_limit must be >= 1");
    const int n = 2 * band_limit;
    weights_ = fejer_weights(n);
    legendre_.resize(band_limit);
    weighted_legendre_.resize(band_limit);
    for (int m = 0; m < band_limit; ++m) {
      legendre_[m] = Matrix::Zero(band_limit - m, n);
    }
    std::vector<Scalar> column(static_cast<size_t>(band_limit) * band_limit);
    for (int j = 0; j < n; ++j) {
      const Scalar theta = Image::colatitude(j, band_limit);
      normalized_legendre(band_limit, std::cos(theta), std::sin(theta), column);
      for (int m = 0; m < band_limit; ++m)
        for (int l = m; l < band_limit; ++l)
          legendre_[m](l - m, j) = column[static_cast<size_t>(l) * band_limit + m];
    }
    for (int m = 0; m < band_limit; ++m)
      weighted_legendre_[m] = legendre_[m] * weights_.asDiagonal();
  }

  /// Shared transform for a band limit; built once per (Scalar, B).
  static std::shared_ptr<const ShTransform> get(int band_limit) {
    static std::mutex mutex;
    static std::map<int, std::shared_ptr<const ShTransform>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[band_limit];
    if (!slot) slot = std::make_shared<const ShTransform>(band_limit);
    return slot;
  }

  int band_limit() const { return band_limit_; }

  /// Colatitude quadrature weights (integrate d(cos theta) over [-1, 1]).
  const Vector& weights() const { return weights_; }

  /// Solid-angle weight of one grid sample of row j.
  Scalar area_weight(int row) const {
    return weights_(row) * std::numbers::pi_v<Scalar> / Scalar(band_limit_);
  }

  Spectrum forward(const Image& image) const {
    image.validate();
    if (image.band_limit() != band_limit_) throw ShapeError("sh_forward: band limit mismatch");
    const int b = band_limit_;
    const int n = 2 * b;
    const Scalar dphi = std::numbers::pi_v<Scalar> / Scalar(b);
    Spectrum out(b, image.channels());
    Eigen::FFT<Scalar> fft;
    ComplexMatrix rows(n, n);  // rows(j, bin) = dphi * sum_k f(j,k) e^{-i bin phi_k}
    ComplexVector src(n), dst(n);
    for (int c = 0; c < image.channels(); ++c) {
      const auto& ch = image.channel(c);
      for (int j = 0; j < n; ++j) {
        src = ch.row(j).transpose().template cast<Complex>();
        fft.fwd(dst, src);
        rows.row(j) = dst.transpose() * dphi;
      }
      for (int m = 0; m < b; ++m) {
        // Columns: Re/Im of bin m, then Re/Im of bin n - m.
        Eigen::Matrix<Scalar, Eigen::Dynamic, 4> bins(n, 4);
        bins.col(0) = rows.col(m).real();
        bins.col(1) = rows.col(m).imag();
        bins.col(2) = rows.col((n - m) % n).real();
        bins.col(3) = rows.col((n - m) % n).imag();
        const Eigen::Matrix<Scalar, Eigen::Dynamic, 4> proj = weighted_legendre_[m] * bins;
        for (int l = m; l < b; ++l) out(l, m, c) = Complex(proj(l - m, 0), proj(l - m, 1));
        if (m == 0) continue;
        const Scalar sign = (m % 2 == 0) ? Scalar(1) : Scalar(-1);
        for (int l = m; l < b; ++l) out(l, -m, c) = sign * Complex(proj(l - m, 2), proj(l - m, 3));
      }
    }
    return out;
  }

  /// Synthesizes the real part of the expansion on the grid.
  Image inverse(const Spectrum& spectrum) const {
    if (spectrum.band_limit() != band_limit_) throw ShapeError("sh_inverse: band limit mismatch");
    if (!spectrum.coeffs().allFinite()) throw InvalidInput("sh_inverse: non-finite coefficient");
    const int b = band_limit_;
    const int n = 2 * b;
    Image out(b, spectrum.channels());
    Eigen::FFT<Scalar> fft;
    ComplexMatrix bins = ComplexMatrix::Zero(n, n);  // bins(j, bin)
    ComplexVector src(n), dst(n);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 4> coeff;
    for (int c = 0; c < spectrum.channels(); ++c) {
      bins.setZero();
      for (int m = 0; m < b; ++m) {
        const Scalar sign = (m % 2 == 0) ? Scalar(1) : Scalar(-1);
        coeff.setZero(b - m, 4);
        for (int l = m; l < b; ++l) {
          const Complex pos = spectrum(l, m, c);
          const Complex neg = m == 0 ? Complex(0) : sign * spectrum(l, -m, c);
          coeff.row(l - m) << pos.real(), pos.imag(), neg.real(), neg.imag();
        }
        const Eigen::Matrix<Scalar, Eigen::Dynamic, 4> synth = legendre_[m].transpose() * coeff;
        for (int j = 0; j < n; ++j) {
          bins(j, m) = Complex(synth(j, 0), synth(j, 1));
          if (m > 0) bins(j, n - m) = Complex(synth(j, 2), synth(j, 3));
        }
      }
      auto& ch = out.channel(c);
      for (int j = 0; j < n; ++j) {
        src = bins.row(j).transpose();
        fft.inv(dst, src);  // scaled by 1/n
        ch.row(j) = (dst.real() * Scalar(n)).transpose();
      }
    }
    return out;
  }

  /// Fejer first-rule weights for nodes cos((2j+1) pi / (2n)), j = 0..n-1.
  static Vector fejer_weights(int n) {
    Vector w(n);
    for (int j = 0; j < n; ++j) {
      const Scalar theta = std::numbers::pi_v<Scalar> * Scalar(2 * j + 1) / Scalar(2 * n);
      Scalar acc(0);
      for (int k = 1; k <= n / 2; ++k)
        acc += std::cos(Scalar(2 * k) * theta) / Scalar(4 * k * k - 1);
      w(j) = Scalar(2) / Scalar(n) * (Scalar(1) - 2 * acc);
    }
    return w;
  }

  /**
   * Orthonormal associated Legendre functions lambda_l^m(x), 0 <= m <= l < B,
   * Condon-Shortley phase included.  out[l*B + m] receives lambda_l^m.
   */
  static void normalized_legendre(int b, Scalar x, Scalar sin_theta, std::vector<Scalar>& out) {
    out.assign(static_cast<size_t>(b) * b, Scalar(0));
    auto at = [&](int l, int m) -> Scalar& { return out[static_cast<size_t>(l) * b + m]; };
    Scalar diag = Scalar(1) / std::sqrt(4 * std::numbers::pi_v<Scalar>);
    for (int m = 0; m < b; ++m) {
      if (m > 0) diag *= -std::sqrt(Scalar(2 * m + 1) / Scalar(2 * m)) * sin_theta;
      at(m, m) = diag;
      if (m + 1 < b) at(m + 1, m) = x * std::sqrt(Scalar(2 * m + 3)) * diag;
      for (int l = m + 2; l < b; ++l) {
        const Scalar ll = Scalar(l), mm = Scalar(m);
        const Scalar a = std::sqrt((4 * ll * ll - 1) / (ll * ll - mm * mm));
        const Scalar prev = std::sqrt(((ll - 1) * (ll - 1) - mm * mm) / (4 * (ll - 1) * (ll - 1) - 1));
        at(l, m) = a * (x * at(l - 1, m) - prev * at(l - 2, m));
      }
    }
  }

 private:
  int band_limit_;
  Vector weights_;
  std::vector<Matrix> legendre_;           // [m](l - m, j) = lambda_l^m(theta_j)
  std::vector<Matrix> weighted_legendre_;  // same, times colatitude weight of row j
};

/// Forward transform using the shared plan for the image's band limit.
template <typename Scalar>
SHSpectrum<Scalar> sh_forward(const SphericalImage<Scalar>& image) {
  image.validate();
  return ShTransform<Scalar>::get(image.band_limit())->forward(image);
}

template <typename Scalar>
SphericalImage<Scalar> sh_inverse(const SHSpectrum<Scalar>& spectrum) {
  if (spectrum.band_limit() < 1) throw InvalidInput("sh_inverse: empty spectrum");
  return ShTransform<Scalar>::get(spectrum.band_limit())->inverse(spectrum);
}

/// Quadrature-weighted grid inner product <f, f> summed over channels.
template <typename Scalar>
Scalar grid_energy(const SphericalImage<Scalar>& image) {
  auto plan = ShTransform<Scalar>::get(image.band_limit());
  Scalar acc(0);
  for (int c = 0; c < image.channels(); ++c)
    for (int j = 0; j < image.size(); ++j)
      acc += plan->area_weight(j) * image.channel(c).row(j).squaredNorm();
  return acc;
}

}  // namespace sphereloc
