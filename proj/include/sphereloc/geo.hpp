#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sphereloc/sphere.hpp"

namespace sphereloc {

/**
 * Georeferenced 8-bit RGB raster.
 *
 * Pixel (col, row) has its centre at world coordinates
 *   x = origin_x + col * gsd,  y = origin_y + row * gsd.
 */
class OverheadMap {
 public:
  OverheadMap() = default;
  OverheadMap(int width, int height, double gsd, double origin_x = 0.0, double origin_y = 0.0);
  OverheadMap(int width, int height, double gsd, double origin_x, double origin_y,
              std::vector<std::uint8_t> rgb);

  int width() const { return width_; }
  int height() const { return height_; }
  double gsd() const { return gsd_; }
  double origin_x() const { return origin_x_; }
  double origin_y() const { return origin_y_; }
  void set_origin(double x, double y) {
    origin_x_ = x;
    origin_y_ = y;
  }

  /// Ground extent M1 x M2 in metres.
  double extent_x() const { return width_ * gsd_; }
  double extent_y() const { return height_ * gsd_; }

  std::uint8_t& at(int row, int col, int c) { return rgb_[(static_cast<size_t>(row) * width_ + col) * 3 + c]; }
  std::uint8_t at(int row, int col, int c) const {
    return rgb_[(static_cast<size_t>(row) * width_ + col) * 3 + c];
  }
  const std::vector<std::uint8_t>& rgb() const { return rgb_; }

  /// True when (x, y) lies within the raster's ground footprint.
  bool contains(double x, double y) const;

  /**
   * Bilinear sample at world (x, y), each channel scaled to [0, 1].
   * Empty when the point falls outside the pixel-centre hull.
   */
  std::optional<Eigen::Vector3d> sample(double x, double y) const;
  /// Same as sample() with coordinates given relative to the origin.
  std::optional<Eigen::Vector3d> sample_local(double dx, double dy) const;

 private:
  int width_ = 0;
  int height_ = 0;
  double gsd_ = 1.0;
  double origin_x_ = 0.0;
  double origin_y_ = 0.0;
  std::vector<std::uint8_t> rgb_;
};

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double altitude = 1.0;  ///< metres above ground, > 0
  double yaw = 0.0;       ///< radians
  double pitch = 0.0;     ///< radians; used only to perturb test views
};

enum class RenderMode { spherical, pinhole_nadir };

struct RenderSpec {
  RenderMode mode = RenderMode::spherical;
  int band_limit = 64;  ///< output grid is 2B x 2B in both modes
  bool sky_crop = false;
  /// With sky_crop, every direction whose elevation exceeds -crop_angle_deg is filled.
  double crop_angle_deg = 10.0;
  double fill_value = 0.5;
};

struct RenderResult {
  SphericalImaged image;
  bool truncated = false;  ///< some ground rays left the raster and were filled
};

/// Ground radius of the 45-degree view cone: H tan 45 = H.
double footprint_radius(const Pose& pose);

/**
 * Ground intersection of a view ray given in the camera frame by its
 * colatitude (0 = zenith) and azimuth.  Empty for rays at or above the
 * horizon.  Yaw maps camera azimuth phi to world azimuth phi - yaw.
 */
std::optional<Eigen::Vector2d> ray_ground_point(const Pose& pose, double colatitude, double azimuth);

/**
 * Renders the view of `map` from `pose`.
 *
 * Spherical mode ray-casts every equiangular sample onto the flat ground
 * z = 0 and samples the raster bilinearly.  Pinhole-nadir mode resamples a
 * square crop of side 2 * altitude centred on the pose and rotated by yaw.
 * Throws OutOfBounds when no sample lands on the raster.
 */
RenderResult render_view(const OverheadMap& map, const Pose& pose, const RenderSpec& spec);

/// Reads a binary P6 raster (maxval 255) and its JSON sidecar.
OverheadMap load_map(const std::filesystem::path& raster_path, const std::filesystem::path& sidecar_path);

void save_map(const OverheadMap& map, const std::filesystem::path& raster_path,
              const std::filesystem::path& sidecar_path, const std::string& crs_note = "local-metric");

/// Binary P6 helpers shared with the CLI.
struct RgbRaster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;
};
RgbRaster read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const RgbRaster& raster);

/// Quantizes a 1- or 3-channel image in [0, 1] to an 8-bit raster and back.
RgbRaster to_raster(const SphericalImaged& image);
SphericalImaged from_raster(const RgbRaster& raster);

}  // namespace sphereloc
