#include <cmath>
#include <numbers>

#include "sphereloc/geo.hpp"

namespace sphereloc {

double footprint_radius(const Pose& pose) {
  if (!(pose.altitude > 0.0)) throw InvalidInput("footprint_radius: altitude must be > 0");
  return pose.altitude;  // H tan(45 deg)
}

namespace {

struct Ray {
  double x, y, z;
};

// Camera-frame direction -> world direction (pitch about the camera y axis, then yaw).
Ray to_world(const Pose& pose, double sin_t, double cos_t, double cos_p, double sin_p) {
  Ray d{sin_t * cos_p, sin_t * sin_p, cos_t};
  if (pose.pitch != 0.0) {
    const double cp = std::cos(pose.pitch), sp = std::sin(pose.pitch);
    d = Ray{d.x * cp + d.z * sp, d.y, -d.x * sp + d.z * cp};
  }
  const double cy = std::cos(pose.yaw), sy = std::sin(pose.yaw);
  return Ray{d.x * cy + d.y * sy, -d.x * sy + d.y * cy, d.z};
}

void check_pose(const Pose& pose) {
  if (!(pose.altitude > 0.0) || !std::isfinite(pose.altitude)) throw InvalidInput("render: altitude must be > 0");
  if (!std::isfinite(pose.x) || !std::isfinite(pose.y) || !std::isfinite(pose.yaw) || !std::isfinite(pose.pitch))
    throw InvalidInput("render: non-finite pose");
}

}  // namespace

std::optional<Eigen::Vector2d> ray_ground_point(const Pose& pose, double colatitude, double azimuth) {
  check_pose(pose);
  const Ray d = to_world(pose, std::sin(colatitude), std::cos(colatitude), std::cos(azimuth), std::sin(azimuth));
  if (!(d.z < 0.0)) return std::nullopt;
  const double t = pose.altitude / -d.z;
  return Eigen::Vector2d(pose.x + t * d.x, pose.y + t * d.y);
}

RenderResult render_view(const OverheadMap& map, const Pose& pose, const RenderSpec& spec) {
  check_pose(pose);
  const int b = spec.band_limit;
  RenderResult out{SphericalImaged(b, 3, spec.fill_value), false};
  const int n = out.image.size();
  // Offsets are accumulated relative to the map origin so that translating
  // pose and origin together leaves the sampled pixels bit-identical.
  const double rel_x = pose.x - map.origin_x();
  const double rel_y = pose.y - map.origin_y();
  bool any_hit = false;

  auto put = [&](int j, int k, double gx, double gy) {
    const auto v = map.sample_local(rel_x + gx, rel_y + gy);
    if (!v) {
      out.truncated = true;
      return;
    }
    any_hit = true;
    for (int c = 0; c < 3; ++c) out.image(j, k, c) = (*v)(c);
  };

  if (spec.mode == RenderMode::spherical) {
    const double crop_cos = std::sin(spec.crop_angle_deg * std::numbers::pi / 180.0);
    std::vector<double> cos_p(n), sin_p(n);
    for (int k = 0; k < n; ++k) {
      const double phi = SphericalImaged::longitude(k, b);
      cos_p[k] = std::cos(phi);
      sin_p[k] = std::sin(phi);
    }
    for (int j = 0; j < n; ++j) {
      const double theta = SphericalImaged::colatitude(j, b);
      const double cos_t = std::cos(theta), sin_t = std::sin(theta);
      // elevation = pi/2 - theta; cropped when elevation > -crop_angle.
      if (spec.sky_crop && cos_t > -crop_cos) continue;
      for (int k = 0; k < n; ++k) {
        const Ray d = to_world(pose, sin_t, cos_t, cos_p[k], sin_p[k]);
        if (!(d.z < 0.0)) continue;
        const double t = pose.altitude / -d.z;
        put(j, k, t * d.x, t * d.y);
      }
    }
  } else {
    const double side = 2.0 * pose.altitude;
    const double cy = std::cos(pose.yaw), sy = std::sin(pose.yaw);
    for (int j = 0; j < n; ++j) {
      const double v = ((j + 0.5) / n - 0.5) * side;
      for (int k = 0; k < n; ++k) {
        const double u = ((k + 0.5) / n - 0.5) * side;
        put(j, k, u * cy + v * sy, -u * sy + v * cy);
      }
    }
  }
  if (!any_hit) throw OutOfBounds("render_view: view footprint lies entirely outside the raster");
  return out;
}

}  // namespace sphereloc
