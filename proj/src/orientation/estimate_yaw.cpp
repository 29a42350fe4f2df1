#include <cmath>
#include <numbers>

#include "sphereloc/orientation.hpp"

namespace sphereloc {

double wrap_angle(double radians) {
  constexpr double two_pi = 2 * std::numbers::pi;
  double r = std::fmod(radians, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  if (r > std::numbers::pi) r -= two_pi;
  return r;
}

namespace {

SHSpectrumd without_zonal(SHSpectrumd s) {
  for (int l = 0; l < s.band_limit(); ++l) s.coeffs().row(SHSpectrumd::index(l, 0)).setZero();
  return s;
}

void require_yaw_signal(const SHSpectrumd& full, const SHSpectrumd& stripped, const char* which) {
  const double total = full.energy();
  const double oriented = stripped.energy();
  if (!(oriented > 1e-18 * total) || !(oriented > 1e-300))
    throw DegenerateInput(std::string("estimate_yaw: ") + which + " view has no azimuthal structure");
}

}  // namespace

YawEstimate estimate_yaw(const SHSpectrumd& query, const SHSpectrumd& reference) {
  if (!query.same_shape(reference)) throw ShapeError("estimate_yaw: spectra differ in band limit or channels");
  const SHSpectrumd q = without_zonal(query);
  const SHSpectrumd r = without_zonal(reference);
  require_yaw_signal(query, q, "query");
  require_yaw_signal(reference, r, "reference");

  YawEstimate est;
  est.profile = yaw_convolve(r, q);
  est.yaw = wrap_angle(est.profile.refined_peak());
  const double norm = est.profile.values.norm();
  est.confidence = norm > 0.0 ? std::clamp(est.profile.peak_value / norm, 0.0, 1.0) : 0.0;
  return est;
}

YawEstimate estimate_yaw(const SphericalImaged& query, const SphericalImaged& reference) {
  if (query.band_limit() != reference.band_limit() || query.channels() != reference.channels())
    throw ShapeError("estimate_yaw: views differ in band limit or channels");
  return estimate_yaw(sh_forward(query), sh_forward(reference));
}

YawEstimate estimate_yaw(const SphericalImaged& query, const SphericalImaged& reference,
                         const DescriptorExtractor& features) {
  if (features.config().backend != DescriptorBackend::sconv_vlad) return estimate_yaw(query, reference);
  return estimate_yaw(features.first_layer_features(query), features.first_layer_features(reference));
}

}  // namespace sphereloc
