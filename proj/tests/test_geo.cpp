#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "sphereloc/geo.hpp"

using namespace sphereloc;

namespace {

constexpr double kPi = std::numbers::pi;

OverheadMap uniform_map(int w, int h, std::uint8_t v, double gsd = 1.0) {
  return OverheadMap(w, h, gsd, 0.0, 0.0, std::vector<std::uint8_t>(static_cast<size_t>(w) * h * 3, v));
}

// Smooth colour ramps: bilinear sampling reproduces them exactly.
OverheadMap ramp_map(int w, int h) {
  OverheadMap m(w, h, 1.0);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      m.at(r, c, 0) = static_cast<std::uint8_t>(c % 256);
      m.at(r, c, 1) = static_cast<std::uint8_t>(r % 256);
      m.at(r, c, 2) = static_cast<std::uint8_t>((c + r) / 4 % 256);
    }
  return m;
}

OverheadMap noise_map(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(0, 255);
  std::vector<std::uint8_t> px(static_cast<size_t>(w) * h * 3);
  for (auto& p : px) p = static_cast<std::uint8_t>(u(rng));
  return OverheadMap(w, h, 1.0, 0.0, 0.0, std::move(px));
}

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "sphereloc_test_geo";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("OverheadMap validates its raster") {
  CHECK_THROWS_AS(OverheadMap(0, 5, 1.0), InvalidInput);
  CHECK_THROWS_AS(OverheadMap(5, 5, 0.0), InvalidInput);
  CHECK_THROWS_AS(OverheadMap(2, 2, 1.0, 0, 0, std::vector<std::uint8_t>(5)), InvalidInput);
  const OverheadMap m(1000, 800, 1.0);
  CHECK(m.extent_x() == 1000.0);
  CHECK(m.extent_y() == 800.0);
  CHECK(OverheadMap(700, 400, 1.0).extent_x() * OverheadMap(700, 400, 1.0).extent_y() == 280000.0);
}

TEST_CASE("bilinear sampling") {
  OverheadMap m(2, 2, 2.0, 10.0, 20.0);
  m.at(0, 0, 0) = 0;
  m.at(0, 1, 0) = 255;
  m.at(1, 0, 0) = 255;
  m.at(1, 1, 0) = 255;
  CHECK((*m.sample(10.0, 20.0))(0) == 0.0);
  CHECK((*m.sample(12.0, 20.0))(0) == 1.0);
  CHECK((*m.sample(11.0, 20.0))(0) == doctest::Approx(0.5));
  CHECK((*m.sample(11.0, 21.0))(0) == doctest::Approx(0.75));
  CHECK_FALSE(m.sample(9.0, 20.0).has_value());
  CHECK_FALSE(m.sample(10.0, 22.5).has_value());
  CHECK(m.contains(9.5, 19.5));
  CHECK_FALSE(m.contains(13.1, 20.0));
}

TEST_CASE("footprint_radius is the altitude") {
  CHECK(footprint_radius(Pose{0, 0, 120.0}) == 120.0);
  CHECK(footprint_radius(Pose{0, 0, 1.0}) == 1.0);
  CHECK(footprint_radius(Pose{0, 0, 200.0}) == 200.0);
  CHECK_THROWS_AS(footprint_radius(Pose{0, 0, 0.0}), InvalidInput);
}

TEST_CASE("ray geometry") {
  const Pose pose{50.0, 60.0, 30.0, 0.7};
  SUBCASE("nadir hits the pose position") {
    const auto g = ray_ground_point(pose, kPi, 0.0);
    REQUIRE(g.has_value());
    CHECK((*g - Eigen::Vector2d(50.0, 60.0)).norm() < 1e-12);
  }
  SUBCASE("45 degrees off nadir lands at distance H") {
    for (double az : {0.0, 1.0, 2.5, -2.0}) {
      const auto g = ray_ground_point(pose, 3 * kPi / 4, az);
      REQUIRE(g.has_value());
      CHECK((*g - Eigen::Vector2d(50.0, 60.0)).norm() == doctest::Approx(30.0).epsilon(1e-12));
    }
  }
  SUBCASE("doubling altitude doubles the footprint") {
    Pose high = pose;
    high.altitude *= 2;
    for (double theta : {2.0, 2.5, 3.0}) {
      const double r1 = (*ray_ground_point(pose, theta, 0.3) - Eigen::Vector2d(50, 60)).norm();
      const double r2 = (*ray_ground_point(high, theta, 0.3) - Eigen::Vector2d(50, 60)).norm();
      CHECK(r2 == doctest::Approx(2 * r1).epsilon(1e-12));
    }
  }
  SUBCASE("rays at or above the horizon miss") {
    CHECK_FALSE(ray_ground_point(pose, kPi / 2, 0.0).has_value());
    CHECK_FALSE(ray_ground_point(pose, 0.3, 0.0).has_value());
  }
  SUBCASE("yaw maps camera azimuth phi to world azimuth phi - yaw") {
    const auto g = ray_ground_point(pose, 3 * kPi / 4, 1.2);
    const Eigen::Vector2d d = *g - Eigen::Vector2d(50, 60);
    CHECK(std::atan2(d.y(), d.x()) == doctest::Approx(1.2 - 0.7).epsilon(1e-12));
  }
}

TEST_CASE("render_view: spherical basics") {
  const OverheadMap map = uniform_map(200, 200, 51);
  RenderSpec spec;
  spec.band_limit = 16;
  const RenderResult r = render_view(map, Pose{100, 100, 10}, spec);
  CHECK(r.image.band_limit() == 16);
  CHECK(r.image.channels() == 3);
  // Upper hemisphere is fill, lower rows near nadir see the raster.
  CHECK(r.image(0, 0, 0) == 0.5);
  CHECK(r.image(31, 5, 1) == doctest::Approx(51.0 / 255.0));
  CHECK(r.truncated);  // rays near the horizon leave the 200 m raster
}

TEST_CASE("render_view: near-nadir samples equal the raster under the pose") {
  const OverheadMap map = ramp_map(300, 300);
  RenderSpec spec;
  spec.band_limit = 64;
  const Pose pose{150.25, 120.5, 20.0};
  const RenderResult r = render_view(map, pose, spec);
  const int j = r.image.size() - 1;
  for (int k = 0; k < r.image.size(); k += 17) {
    const auto g = *ray_ground_point(pose, SphericalImaged::colatitude(j, 64), SphericalImaged::longitude(k, 64));
    const auto v = *map.sample(g.x(), g.y());
    for (int c = 0; c < 3; ++c) CHECK(r.image(j, k, c) == doctest::Approx(v(c)).epsilon(1e-12));
    CHECK((g - Eigen::Vector2d(pose.x, pose.y)).norm() < 20.0 * std::tan(kPi / 128) + 1e-9);
  }
}

TEST_CASE("render_view: sky crop fills everything above the crop angle") {
  const OverheadMap map = uniform_map(400, 400, 0);
  RenderSpec spec;
  spec.band_limit = 32;
  spec.sky_crop = true;
  spec.crop_angle_deg = 45.0;
  const RenderResult r = render_view(map, Pose{200, 200, 50}, spec);
  for (int j = 0; j < r.image.size(); ++j) {
    const double elevation = kPi / 2 - SphericalImaged::colatitude(j, 32);
    const double expected = elevation > -kPi / 4 ? 0.5 : 0.0;
    CHECK(r.image(j, 3, 2) == expected);
  }
  CHECK_FALSE(r.truncated);
}

TEST_CASE("render_view: out of bounds and truncation") {
  const OverheadMap map = uniform_map(100, 100, 200);
  RenderSpec spec;
  spec.band_limit = 8;
  spec.sky_crop = true;
  spec.crop_angle_deg = 45.0;
  CHECK_THROWS_AS(render_view(map, Pose{-500, 50, 10}, spec), OutOfBounds);
  const RenderResult edge = render_view(map, Pose{0, 50, 10}, spec);
  CHECK(edge.truncated);
  CHECK_FALSE(render_view(map, Pose{50, 50, 10}, spec).truncated);
  CHECK_THROWS_AS(render_view(map, Pose{50, 50, 0}, spec), InvalidInput);
  CHECK_THROWS_AS(render_view(map, Pose{50, 50, -1}, spec), InvalidInput);
}

TEST_CASE("render_view: yaw consistency") {
  const OverheadMap map = noise_map(300, 300, 5);
  RenderSpec spec;
  spec.band_limit = 32;
  const Pose base{150, 150, 25};
  const SphericalImaged ref = render_view(map, base, spec).image;
  SUBCASE("grid yaws are exact longitude shifts") {
    for (int s : {1, 5, 16, 63}) {
      Pose p = base;
      p.yaw = RotationZd::grid(s, 32).yaw;
      const SphericalImaged rotated = render_view(map, p, spec).image;
      CHECK(max_abs_difference(rotated, rotate_z_steps(ref, s)) < 1e-9);
    }
  }
  SUBCASE("off-grid yaws match a resampled shift within 2 grey levels on average") {
    const OverheadMap smooth = ramp_map(300, 300);
    const SphericalImaged sref = render_view(smooth, base, spec).image;
    Pose p = base;
    p.yaw = 0.3 * kPi / 32;  // 0.3 of a grid step
    const SphericalImaged rotated = render_view(smooth, p, spec).image;
    // Linear interpolation between neighbouring columns of the yaw-0 view.
    double err = 0;
    const int n = sref.size();
    for (int c = 0; c < 3; ++c)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const double shifted = 0.7 * sref(j, k, c) + 0.3 * sref(j, (k + n - 1) % n, c);
          err += std::abs(rotated(j, k, c) - shifted);
        }
    CHECK(err / (3.0 * n * n) * 255.0 < 2.0);
  }
}

TEST_CASE("render_view: translation consistency") {
  OverheadMap map = noise_map(120, 120, 9);
  map.set_origin(1000.125, -2000.5);
  RenderSpec spec;
  spec.band_limit = 16;
  const Pose pose{1060.375, -1940.75, 15.0, 0.4};
  const SphericalImaged a = render_view(map, pose, spec).image;
  auto shifted_render = [&](double dx, double dy) {
    OverheadMap moved = map;
    moved.set_origin(map.origin_x() + dx, map.origin_y() + dy);
    Pose shifted = pose;
    shifted.x += dx;
    shifted.y += dy;
    return render_view(moved, shifted, spec).image;
  };
  SUBCASE("bit-exact when the shifted coordinates are representable") {
    for (auto [dx, dy] : {std::pair{3.75, -8.5}, {-123.0, 456.25}, {0.125, 0.0625}}) CHECK(shifted_render(dx, dy) == a);
  }
  SUBCASE("within rounding otherwise") {
    for (auto [dx, dy] : {std::pair{0.1, 0.2}, {-77.7, 13.3}}) CHECK(max_abs_difference(shifted_render(dx, dy), a) < 1e-9);
  }
}

TEST_CASE("render_view: determinism") {
  const OverheadMap map = noise_map(100, 100, 3);
  RenderSpec spec;
  spec.band_limit = 16;
  const Pose p{40, 60, 12, 1.1};
  CHECK(render_view(map, p, spec).image == render_view(map, p, spec).image);
}

TEST_CASE("render_view: pinhole nadir") {
  RenderSpec spec;
  spec.mode = RenderMode::pinhole_nadir;
  spec.band_limit = 16;
  SUBCASE("uniform map renders uniform") {
    const RenderResult r = render_view(uniform_map(200, 200, 77), Pose{100, 100, 30}, spec);
    CHECK_FALSE(r.truncated);
    for (int c = 0; c < 3; ++c) CHECK(r.image.channel(c).maxCoeff() == r.image.channel(c).minCoeff());
    CHECK(r.image(3, 4, 0) == doctest::Approx(77.0 / 255.0));
  }
  SUBCASE("crop side is twice the altitude") {
    const OverheadMap map = ramp_map(400, 400);
    const RenderResult r = render_view(map, Pose{200, 200, 50}, spec);
    // Red channel encodes x: first and last columns sit 100 m * (1 - 1/n) apart.
    const double span = (r.image(16, 31, 0) - r.image(16, 0, 0)) * 255.0;
    CHECK(span == doctest::Approx(100.0 * 31.0 / 32.0).epsilon(1e-9));
  }
  SUBCASE("two altitudes give different footprints") {
    const OverheadMap map = ramp_map(400, 400);
    CHECK_FALSE(render_view(map, Pose{200, 200, 20}, spec).image == render_view(map, Pose{200, 200, 60}, spec).image);
  }
}

TEST_CASE("map files round trip through ppm and sidecar") {
  const auto dir = temp_dir();
  OverheadMap map = noise_map(37, 21, 4);
  map.set_origin(5.5, -3.25);
  save_map(map, dir / "m.ppm", dir / "m.json");
  const OverheadMap back = load_map(dir / "m.ppm", dir / "m.json");
  CHECK(back.width() == 37);
  CHECK(back.height() == 21);
  CHECK(back.gsd() == 1.0);
  CHECK(back.origin_x() == 5.5);
  CHECK(back.origin_y() == -3.25);
  CHECK(back.rgb() == map.rgb());
}

TEST_CASE("sidecar errors name the field") {
  const auto dir = temp_dir();
  write_ppm(dir / "s.ppm", RgbRaster{4, 3, std::vector<std::uint8_t>(36, 9)});
  auto expect_field = [&](const std::string& body, const std::string& field) {
    std::ofstream(dir / "s.json") << body;
    try {
      load_map(dir / "s.ppm", dir / "s.json");
      FAIL("expected a format error for " << field);
    } catch (const FormatError& e) {
      CHECK(e.field() == field);
    }
  };
  expect_field(R"({"gsd_m_per_px": 0, "origin_x_m": 0, "origin_y_m": 0})", "gsd_m_per_px");
  expect_field(R"({"gsd_m_per_px": -2, "origin_x_m": 0, "origin_y_m": 0})", "gsd_m_per_px");
  expect_field(R"({"origin_x_m": 0, "origin_y_m": 0})", "gsd_m_per_px");
  expect_field(R"({"gsd_m_per_px": 1, "origin_y_m": 0})", "origin_x_m");
  expect_field(R"({"gsd_m_per_px": 1, "origin_x_m": 0, "origin_y_m": "north"})", "origin_y_m");
  expect_field(R"({"gsd_m_per_px": 1, "origin_x_m": 0, "origin_y_m": 0, "crs_note": 3})", "crs_note");
  expect_field("not json", "json");

  std::ofstream(dir / "s.json") << R"({"gsd_m_per_px": 2, "origin_x_m": 1, "origin_y_m": 2, "extra": [1, 2]})";
  const OverheadMap ok = load_map(dir / "s.ppm", dir / "s.json");
  CHECK(ok.extent_x() == 8.0);
}

TEST_CASE("ppm reader rejects malformed files") {
  const auto dir = temp_dir();
  std::ofstream(dir / "bad.ppm", std::ios::binary) << "P3\n1 1\n255\n0 0 0\n";
  CHECK_THROWS_AS(read_ppm(dir / "bad.ppm"), FormatError);
  std::ofstream(dir / "short.ppm", std::ios::binary) << "P6\n4 4\n255\nabc";
  CHECK_THROWS_AS(read_ppm(dir / "short.ppm"), FormatError);
  std::ofstream(dir / "max.ppm", std::ios::binary) << "P6\n1 1\n65535\n......";
  CHECK_THROWS_AS(read_ppm(dir / "max.ppm"), FormatError);
  std::ofstream(dir / "comment.ppm", std::ios::binary) << "P6\n# note\n1 1\n255\n\x01\x02\x03";
  const RgbRaster r = read_ppm(dir / "comment.ppm");
  CHECK(r.rgb == std::vector<std::uint8_t>{1, 2, 3});
  CHECK_THROWS_AS(read_ppm(dir / "missing.ppm"), FormatError);
}

TEST_CASE("raster quantization of spherical images") {
  SphericalImaged img(4, 3, 0.25);
  img(1, 2, 0) = 1.5;
  const RgbRaster r = to_raster(img);
  CHECK(r.width == 8);
  const SphericalImaged back = from_raster(r);
  CHECK(back(1, 2, 0) == 1.0);
  CHECK(back(0, 0, 1) == doctest::Approx(64.0 / 255.0));
  CHECK_THROWS_AS(from_raster(RgbRaster{3, 3, std::vector<std::uint8_t>(27)}), ShapeError);
}
