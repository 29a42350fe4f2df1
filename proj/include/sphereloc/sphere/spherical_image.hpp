#pragma once

#include <Eigen/Core>

#include <numbers>
#include <string>
#include <vector>

#include "sphereloc/errors.hpp"

namespace sphereloc {

/**
 * Equiangular sample grid of a (multi-channel) function on the sphere.
 *
 * The grid has 2B colatitude rows and 2B longitude columns, with
 *   theta_j = pi (2j + 1) / (4B)   (row j, measured from the zenith)
 *   phi_k   = 2 pi k / (2B)        (column k)
 * Row 0 is closest to the zenith; the last row is closest to nadir.
 */
template <typename Scalar_>
class SphericalImage {
 public:
  using Scalar = Scalar_;
  using Channel = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  SphericalImage() = default;

  SphericalImage(int band_limit, int channels, Scalar fill = Scalar(0)) : band_limit_(band_limit) {
    if (band_limit < 1) throw InvalidInput("SphericalImage: band_limit must be >= 1");
    if (channels < 1) throw InvalidInput("SphericalImage: channels must be >= 1");
    data_.assign(channels, Channel::Constant(2 * band_limit, 2 * band_limit, fill));
  }

  int band_limit() const { return band_limit_; }
  /// Side length of the grid (2B); width == height.
  int size() const { return 2 * band_limit_; }
  int width() const { return size(); }
  int height() const { return size(); }
  int channels() const { return static_cast<int>(data_.size()); }
  bool empty() const { return data_.empty(); }

  Channel& channel(int c) { return data_.at(c); }
  const Channel& channel(int c) const { return data_.at(c); }

  Scalar& operator()(int row, int col, int c) { return data_[c](row, col); }
  Scalar operator()(int row, int col, int c) const { return data_[c](row, col); }

  static Scalar colatitude(int row, int band_limit) {
    return std::numbers::pi_v<Scalar> * Scalar(2 * row + 1) / Scalar(4 * band_limit);
  }
  static Scalar longitude(int col, int band_limit) {
    return std::numbers::pi_v<Scalar> * Scalar(col) / Scalar(band_limit);
  }

  bool all_finite() const {
    for (const auto& ch : data_)
      if (!ch.allFinite()) return false;
    return true;
  }

  /// Throws InvalidInput unless every invariant of the grid holds.
  void validate() const {
    if (band_limit_ < 1 || data_.empty()) throw InvalidInput("SphericalImage: empty image");
    for (const auto& ch : data_)
      if (ch.rows() != size() || ch.cols() != size())
        throw InvalidInput("SphericalImage: channel grid is not 2B x 2B");
    if (!all_finite()) throw InvalidInput("SphericalImage: non-finite sample");
  }

  /// Samples in row-major (colatitude, longitude, channel) order.
  std::vector<Scalar> interleaved() const {
    std::vector<Scalar> out;
    out.reserve(static_cast<size_t>(size()) * size() * channels());
    for (int r = 0; r < size(); ++r)
      for (int k = 0; k < size(); ++k)
        for (const auto& ch : data_) out.push_back(ch(r, k));
    return out;
  }

  template <typename Other>
  SphericalImage<Other> cast() const {
    SphericalImage<Other> out(band_limit_, channels());
    for (int c = 0; c < channels(); ++c) out.channel(c) = data_[c].template cast<Other>();
    return out;
  }

  friend bool operator==(const SphericalImage& a, const SphericalImage& b) {
    if (a.band_limit_ != b.band_limit_ || a.channels() != b.channels()) return false;
    for (int c = 0; c < a.channels(); ++c)
      if (a.data_[c] != b.data_[c]) return false;
    return true;
  }

 private:
  int band_limit_ = 0;
  std::vector<Channel> data_;
};

/// Largest absolute per-sample difference; throws ShapeError on mismatched grids.
template <typename Scalar>
Scalar max_abs_difference(const SphericalImage<Scalar>& a, const SphericalImage<Scalar>& b) {
  if (a.band_limit() != b.band_limit() || a.channels() != b.channels())
    throw ShapeError("max_abs_difference: image shapes differ");
  Scalar worst(0);
  for (int c = 0; c < a.channels(); ++c)
    worst = std::max(worst, (a.channel(c) - b.channel(c)).cwiseAbs().maxCoeff());
  return worst;
}

/**
 * Rotates the image about the polar axis by a whole number of longitude
 * steps (2 pi / 2B each).  Exact: this is a circular column shift, so
 * out(theta, phi) = in(theta, phi - steps * dphi).
 */
template <typename Scalar>
SphericalImage<Scalar> rotate_z_steps(const SphericalImage<Scalar>& image, int steps) {
  const int n = image.size();
  const int s = ((steps % n) + n) % n;
  SphericalImage<Scalar> out(image.band_limit(), image.channels());
  for (int c = 0; c < image.channels(); ++c) {
    const auto& in = image.channel(c);
    auto& dst = out.channel(c);
    for (int k = 0; k < n; ++k) dst.col((k + s) % n) = in.col(k);
  }
  return out;
}

}  // namespace sphereloc
