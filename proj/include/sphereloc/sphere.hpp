#pragma once

#include "sphereloc/sphere/sh_spectrum.hpp"
#include "sphereloc/sphere/sh_transform.hpp"
#include "sphereloc/sphere/spherical_image.hpp"
#include "sphereloc/sphere/yaw_correlation.hpp"

namespace sphereloc {

using SphericalImaged = SphericalImage<double>;
using SHSpectrumd = SHSpectrum<double>;
using RotationZd = RotationZ<double>;
using CorrelationProfiled = CorrelationProfile<double>;

}  // namespace sphereloc
