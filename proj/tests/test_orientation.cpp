#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sphereloc/eval.hpp"
#include "sphereloc/orientation.hpp"
#include "test_support.hpp"

using namespace sphereloc;
using sphereloc::testing::random_real_spectrum;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

double angle_error(double a, double b) { return std::abs(wrap_angle(a - b)); }

// Brute-force oracle: the grid yaw minimizing the squared distance between
// the rotated reference and the query, by direct column shifts.
double oracle_yaw(const SphericalImaged& query, const SphericalImaged& reference) {
  const int n = query.size();
  double best = 1e300;
  int best_s = 0;
  for (int s = 0; s < n; ++s) {
    const SphericalImaged r = rotate_z_steps(reference, s);
    double d = 0.0;
    for (int c = 0; c < query.channels(); ++c) d += (r.channel(c) - query.channel(c)).squaredNorm();
    if (d < best) {
      best = d;
      best_s = s;
    }
  }
  return wrap_angle(2 * kPi * best_s / n);
}

}  // namespace

TEST_CASE("wrap_angle") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(3 * kPi / 2) == doctest::Approx(-kPi / 2));
  CHECK(wrap_angle(-7.0) == doctest::Approx(-7.0 + 2 * kPi));
  CHECK(wrap_angle(1e3) > -kPi);
  CHECK(wrap_angle(1e3) <= kPi);
}

TEST_CASE("identical inputs give zero yaw and full confidence") {
  const SHSpectrumd f = random_real_spectrum(16, 3, 1);
  const YawEstimate est = estimate_yaw(f, f);
  CHECK(est.yaw == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(est.profile.peak_index == 0);
  const YawEstimate other = estimate_yaw(f, random_real_spectrum(16, 3, 2));
  CHECK(est.confidence > other.confidence);
  CHECK(est.confidence <= 1.0);
  CHECK(other.confidence >= 0.0);
}

TEST_CASE("45 degrees at B = 64 within half a grid step") {
  const int b = 64;
  const SHSpectrumd ref = random_real_spectrum(b, 1, 3);
  const SphericalImaged ref_img = sh_inverse(ref);
  for (double deg : {45.0, 46.3, -45.0}) {
    const SHSpectrumd q = rotate_z(ref, RotationZd(deg * kDeg));
    const YawEstimate est = estimate_yaw(sh_inverse(q), ref_img);
    CHECK(angle_error(est.yaw, deg * kDeg) <= 1.4 * kDeg);
  }
  // Grid rotations agree with the rotate-and-compare oracle.
  const SphericalImaged q = rotate_z_steps(ref_img, 16);
  CHECK(angle_error(estimate_yaw(q, ref_img).yaw, oracle_yaw(q, ref_img)) < 1e-9);
  CHECK(angle_error(oracle_yaw(q, ref_img), 45 * kDeg) < 1e-12);
}

TEST_CASE("off-grid yaws recovered against the oracle on scenes") {
  const OverheadMap map = [] {
    SyntheticWorldSpec spec;
    spec.seed = 3;
    spec.extent_m = {400.0, 400.0};
    return generate_world(spec);
  }();
  RenderSpec rs;
  rs.band_limit = 32;
  const double step = kPi / 32;
  for (int i = 0; i < 6; ++i) {
    const double x = 150.0 + 20.0 * i;
    const double yaw = -2.0 + 0.77 * i;
    const SphericalImaged ref = render_view(map, Pose{x, 200.0, 40.0, 0.0}, rs).image;
    const SphericalImaged q = render_view(map, Pose{x, 200.0, 40.0, yaw}, rs).image;
    const YawEstimate est = estimate_yaw(q, ref);
    CHECK(angle_error(est.yaw, yaw) <= step);
    CHECK(angle_error(est.yaw, oracle_yaw(q, ref)) <= step);
  }
}

TEST_CASE("composition and antisymmetry") {
  const int b = 32;
  const double step = kPi / b;
  const SHSpectrumd f = random_real_spectrum(b, 3, 7);
  const double a = 0.9, c = 2.8;
  const SHSpectrumd fa = rotate_z(f, RotationZd(a));
  const SHSpectrumd fac = rotate_z(fa, RotationZd(c));
  const double ya = estimate_yaw(fa, f).yaw;
  const double yc = estimate_yaw(fac, fa).yaw;
  CHECK(angle_error(estimate_yaw(fac, f).yaw, ya + yc) <= step);
  CHECK(angle_error(ya + yc, a + c) <= step);
  CHECK(angle_error(estimate_yaw(f, fa).yaw, -ya) <= step);
}

TEST_CASE("feature-space correlation with the sconv-vlad extractor") {
  const int b = 16;
  DescriptorConfig cfg;
  cfg.backend = DescriptorBackend::sconv_vlad;
  cfg.num_layers = 1;
  const DescriptorExtractor ex(cfg, b);
  SphericalImaged ref = sphereloc::testing::random_bandlimited_image(b, 3, 11);
  for (int c = 0; c < 3; ++c) ref.channel(c) = (ref.channel(c).array() * 0.05 + 0.5).matrix();
  for (int s : {0, 3, 17, 30}) {
    const YawEstimate est = estimate_yaw(rotate_z_steps(ref, s), ref, ex);
    CHECK(angle_error(est.yaw, wrap_angle(s * kPi / b)) < 1e-6);
  }
  // The power-spectrum extractor falls back to raw intensities.
  const DescriptorExtractor raw(DescriptorConfig{}, b);
  const SphericalImaged q = rotate_z_steps(ref, 5);
  CHECK(estimate_yaw(q, ref, raw).yaw == estimate_yaw(q, ref).yaw);
}

TEST_CASE("degenerate and mismatched inputs") {
  const SphericalImaged flat(8, 3, 0.4);
  const SphericalImaged textured = sphereloc::testing::random_bandlimited_image(8, 3, 2);
  CHECK_THROWS_AS(estimate_yaw(flat, textured), DegenerateInput);
  CHECK_THROWS_AS(estimate_yaw(textured, flat), DegenerateInput);

  // Purely zonal content: varies with colatitude only.
  SphericalImaged bands(8, 1);
  for (int j = 0; j < 16; ++j) bands.channel(0).row(j).setConstant(std::cos(SphericalImaged::colatitude(j, 8)));
  CHECK_THROWS_AS(estimate_yaw(bands, bands), DegenerateInput);

  CHECK_THROWS_AS(estimate_yaw(textured, sphereloc::testing::random_bandlimited_image(16, 3, 2)), ShapeError);
  CHECK_THROWS_AS(estimate_yaw(textured, sphereloc::testing::random_bandlimited_image(8, 1, 2)), ShapeError);
}
