#pragma once

#include "sphereloc/descriptor.hpp"
#include "sphereloc/sphere.hpp"

namespace sphereloc {

struct YawEstimate {
  double yaw = 0.0;         ///< radians in (-pi, pi]
  double confidence = 0.0;  ///< peak / L2 norm of the profile, in [0, 1]
  CorrelationProfiled profile;
};

/**
 * Yaw that rotates `reference` onto `query`, i.e. query ~ rotate_z(reference, yaw),
 * found as the refined argmax of the harmonic-domain yaw correlation.
 * Zonal (m = 0) terms carry no yaw information and are excluded.
 * Throws DegenerateInput when either input has no m != 0 energy.
 */
YawEstimate estimate_yaw(const SHSpectrumd& query, const SHSpectrumd& reference);

/// Raw-intensity correlation of two views.
YawEstimate estimate_yaw(const SphericalImaged& query, const SphericalImaged& reference);

/**
 * Correlates the first-layer spherical-convolution features when the
 * extractor uses the sconv-vlad backend, raw intensities otherwise.
 */
YawEstimate estimate_yaw(const SphericalImaged& query, const SphericalImaged& reference,
                         const DescriptorExtractor& features);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double radians);

}  // namespace sphereloc
