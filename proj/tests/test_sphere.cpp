#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sphereloc/sphere.hpp"
#include "test_support.hpp"

using namespace sphereloc;
namespace st = sphereloc::testing;

namespace {

/// Spatial-domain brute force: quadrature inner product of the grid-rotated f with h.
Eigen::VectorXd brute_force_profile(const SphericalImaged& f, const SphericalImaged& h) {
  const int n = f.size();
  const Eigen::VectorXd w = st::oracle_weights(n);
  const double dphi = 2 * std::numbers::pi / n;
  Eigen::VectorXd out(n);
  for (int k = 0; k < n; ++k) {
    const SphericalImaged rf = rotate_z_steps(f, k);
    double acc = 0;
    for (int c = 0; c < f.channels(); ++c)
      for (int j = 0; j < n; ++j) acc += w(j) * dphi * rf.channel(c).row(j).dot(h.channel(c).row(j));
    out(k) = acc;
  }
  return out;
}

}  // namespace

TEST_CASE("fejer weights match the moment-solved oracle") {
  for (int n : {4, 16, 32}) {
    const Eigen::VectorXd a = ShTransform<double>::fejer_weights(n);
    const Eigen::VectorXd b = st::oracle_weights(n);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(a.sum() == doctest::Approx(2.0).epsilon(1e-14));
  }
}

TEST_CASE("sh_forward of a constant image") {
  SphericalImaged one(8, 1, 1.0);
  const SHSpectrumd s = sh_forward(one);
  CHECK(std::abs(s(0, 0) - std::complex<double>(std::sqrt(4 * std::numbers::pi), 0)) < 1e-12);
  double rest = 0;
  for (int l = 1; l < 8; ++l)
    for (int m = -l; m <= l; ++m) rest = std::max(rest, std::abs(s(l, m)));
  CHECK(rest < 1e-12);
}

TEST_CASE("sh_forward of Y_1^0 is a unit coefficient") {
  const int b = 8;
  SphericalImaged img(b, 1);
  for (int j = 0; j < img.size(); ++j)
    for (int k = 0; k < img.size(); ++k)
      img(j, k, 0) = st::oracle_ylm(1, 0, SphericalImaged::colatitude(j, b), 0).real();
  const SHSpectrumd s = sh_forward(img);
  for (int l = 0; l < b; ++l)
    for (int m = -l; m <= l; ++m) {
      const std::complex<double> expect = (l == 1 && m == 0) ? 1.0 : 0.0;
      CHECK(std::abs(s(l, m) - expect) < 1e-9);
    }
}

TEST_CASE("sh_forward matches the naive quadrature oracle") {
  for (int b : {4, 8}) {
    const SphericalImaged img = st::random_bandlimited_image(b, 2, 17 + b);
    CHECK(st::max_abs(sh_forward(img), st::oracle_forward(img)) < 1e-9);
  }
}

TEST_CASE("sh_forward recovers the generating spectrum") {
  const SHSpectrumd s = st::random_real_spectrum(16, 1, 3);
  CHECK(st::max_abs(sh_forward(sh_inverse(s)), s) < 1e-9);
}

TEST_CASE("sh_forward rejects non-finite samples") {
  SphericalImaged img(4, 1, 0.0);
  img(2, 3, 0) = std::nan("");
  CHECK_THROWS_AS(sh_forward(img), InvalidInput);
}

TEST_CASE("sh_inverse basics") {
  SHSpectrumd s(8, 1);
  s(0, 0) = std::sqrt(4 * std::numbers::pi);
  const SphericalImaged img = sh_inverse(s);
  CHECK((img.channel(0).array() - 1.0).abs().maxCoeff() < 1e-12);

  const SphericalImaged zero = sh_inverse(SHSpectrumd(8, 2));
  CHECK(zero.channel(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(zero.channel(1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("round trip of a band-limited image at B=16") {
  const SphericalImaged img = st::random_bandlimited_image(16, 3, 99);
  CHECK(max_abs_difference(sh_inverse(sh_forward(img)), img) < 1e-6);
}

TEST_CASE("real-input spectra are conjugate symmetric") {
  const SHSpectrumd s = sh_forward(st::random_bandlimited_image(8, 1, 5));
  for (int l = 0; l < 8; ++l)
    for (int m = 1; m <= l; ++m) {
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      CHECK(std::abs(s(l, -m) - sign * std::conj(s(l, m))) < 1e-12);
    }
}

TEST_CASE("Parseval and linearity") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SphericalImaged x = st::random_bandlimited_image(12, 2, seed);
    const SphericalImaged y = st::random_bandlimited_image(12, 2, seed + 100);
    const SHSpectrumd fx = sh_forward(x);
    CHECK(std::abs(grid_energy(x) - fx.energy()) / fx.energy() < 1e-6);

    SphericalImaged mix(12, 2);
    for (int c = 0; c < 2; ++c) mix.channel(c) = 2.5 * x.channel(c) - 0.75 * y.channel(c);
    const SHSpectrumd expect = 2.5 * fx + (-0.75) * sh_forward(y);
    CHECK(st::max_abs(sh_forward(mix), expect) < 1e-9);
  }
}

TEST_CASE("rotate_z phase law and identities") {
  const SHSpectrumd s = st::random_real_spectrum(8, 1, 11);
  CHECK(st::max_abs(rotate_z(s, RotationZd(0.0)), s) == 0.0);
  CHECK(st::max_abs(rotate_z(s, RotationZd(2 * std::numbers::pi)), s) < 1e-12);

  SHSpectrumd y11(4, 1);
  y11(1, 1) = {0.3, -0.2};
  const SHSpectrumd r = rotate_z(y11, RotationZd(std::numbers::pi / 2));
  CHECK(std::abs(r(1, 1) - y11(1, 1) * std::polar(1.0, -std::numbers::pi / 2)) < 1e-15);

  const SHSpectrumd rs = rotate_z(s, RotationZd(1.234));
  for (int l = 0; l < 8; ++l) CHECK(rs.degree_energy(l) == doctest::Approx(s.degree_energy(l)).epsilon(1e-13));
}

TEST_CASE("rotate_z on a spectrum agrees with a grid column shift") {
  const SphericalImaged img = st::random_bandlimited_image(8, 1, 21);
  const SHSpectrumd a = rotate_z(sh_forward(img), RotationZd::grid(5, 8));
  const SHSpectrumd b = sh_forward(rotate_z_steps(img, 5));
  CHECK(st::max_abs(a, b) < 1e-10);
}

TEST_CASE("RotationZ normalizes into [0, 2pi)") {
  CHECK(RotationZd(-std::numbers::pi / 2).yaw == doctest::Approx(1.5 * std::numbers::pi));
  CHECK(RotationZd(2 * std::numbers::pi).yaw == doctest::Approx(0.0));
  CHECK(RotationZd(7.0).yaw < 2 * std::numbers::pi);
}

TEST_CASE("yaw_convolve: self correlation peaks at zero with Parseval energy") {
  const SHSpectrumd f = sh_forward(st::random_bandlimited_image(8, 3, 4));
  const CorrelationProfiled p = yaw_convolve(f, f);
  CHECK(p.size() == 16);
  CHECK(p.peak_index == 0);
  CHECK(p.peak_value == doctest::Approx(f.energy()).epsilon(1e-12));
  CHECK(p.peak_value == p.values.maxCoeff());
}

TEST_CASE("yaw_convolve matches the spatial brute-force oracle") {
  const int b = 8;
  const SphericalImaged f = st::random_bandlimited_image(b, 2, 31);
  const SphericalImaged h = st::random_bandlimited_image(b, 2, 32);
  const Eigen::VectorXd oracle = brute_force_profile(f, h);
  const CorrelationProfiled p = yaw_convolve(sh_forward(f), sh_forward(h));
  CHECK((p.values - oracle).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("yaw_convolve locates grid rotations") {
  const int b = 8;
  const SHSpectrumd f = sh_forward(st::random_bandlimited_image(b, 1, 41));
  for (int k = 0; k < 2 * b; ++k) {
    const SHSpectrumd h = rotate_z(f, RotationZd::grid(k, b));
    CHECK(yaw_convolve(f, h).peak_index == k);
  }
}

TEST_CASE("yaw_convolve of disjoint harmonic support vanishes") {
  SHSpectrumd f(6, 1), h(6, 1);
  f(2, 1) = 1.0;
  f(2, -1) = -1.0;
  h(3, 2) = {0.5, 0.5};
  h(3, -2) = {0.5, -0.5};
  CHECK(yaw_convolve(f, h).values.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("yaw_convolve rejects mismatched shapes") {
  CHECK_THROWS_AS(yaw_convolve(SHSpectrumd(4, 1), SHSpectrumd(5, 1)), ShapeError);
  CHECK_THROWS_AS(yaw_convolve(SHSpectrumd(4, 1), SHSpectrumd(4, 2)), ShapeError);
}

TEST_CASE("equivariance: rotating f shifts the profile") {
  const int b = 8, n = 16;
  const SHSpectrumd f = sh_forward(st::random_bandlimited_image(b, 1, 51));
  const SHSpectrumd h = sh_forward(st::random_bandlimited_image(b, 1, 52));
  const Eigen::VectorXd base = yaw_convolve(f, h).values;
  for (int s = 0; s < n; ++s) {
    const Eigen::VectorXd shifted = yaw_convolve(rotate_z(f, RotationZd::grid(s, b)), h).values;
    double dev = 0;
    for (int k = 0; k < n; ++k) dev = std::max(dev, std::abs(shifted(k) - base((k + s) % n)));
    CHECK(dev < 1e-8);
  }
}

TEST_CASE("refined peak recovers off-grid rotations within half a step") {
  const int b = 16;
  const SHSpectrumd f = sh_forward(st::random_bandlimited_image(b, 1, 61));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> yaw(0, 2 * std::numbers::pi);
  for (int t = 0; t < 20; ++t) {
    const double a = yaw(rng);
    const CorrelationProfiled p = yaw_convolve(f, rotate_z(f, RotationZd(a)));
    double err = std::abs(p.refined_peak() - a);
    err = std::min(err, 2 * std::numbers::pi - err);
    CHECK(err <= std::numbers::pi / (2 * b));
  }
}

TEST_CASE("float scalar instantiation") {
  SphericalImage<float> one(4, 1, 1.0f);
  const SHSpectrum<float> s = sh_forward(one);
  CHECK(std::abs(s(0, 0).real() - std::sqrt(4 * std::numbers::pi_v<float>)) < 1e-5f);
  CHECK(max_abs_difference(sh_inverse(s), one) < 1e-5f);
}
