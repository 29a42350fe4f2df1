#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sphereloc/sphere.hpp"

namespace sphereloc {

enum class DescriptorBackend { power_spectrum, sconv_vlad };

std::string to_string(DescriptorBackend backend);
DescriptorBackend parse_backend(const std::string& name);

struct DescriptorConfig {
  DescriptorBackend backend = DescriptorBackend::power_spectrum;
  int num_layers = 4;
  int kernels_per_layer = 8;
  int vlad_clusters = 32;  ///< K
  std::uint64_t weight_seed = 0;
  std::optional<std::filesystem::path> weight_file;
  double assignment_sharpness = 10.0;  ///< soft-assignment inverse temperature

  void validate() const;
};

/// Unit-norm global place descriptor.
struct PlaceDescriptor {
  Eigen::VectorXd values;
  DescriptorBackend backend = DescriptorBackend::power_spectrum;
  int band_limit = 0;

  int dim() const { return static_cast<int>(values.size()); }
};

/// Cosine similarity of two descriptors, in [-1, 1].  Exactly 1 for identical inputs.
double similarity(const PlaceDescriptor& a, const PlaceDescriptor& b);

/**
 * Fixed weights of the spherical-convolution cascade.
 *
 * Layer l maps in_channels(l) feature spheres to `kernels` spheres by a
 * per-degree gain: out_o(l,m) = sum_i gain(o * in + i, l) * in_i(l,m).
 * Zonal filters of this form commute with every rotation of the sphere.
 */
struct SconvWeights {
  int band_limit = 0;
  int input_channels = 0;
  int kernels = 0;
  std::vector<Eigen::MatrixXd> gains;  ///< per layer: (kernels * in) x band_limit
  Eigen::MatrixXd centers;             ///< kernels x K, unit columns

  int layers() const { return static_cast<int>(gains.size()); }
  int clusters() const { return static_cast<int>(centers.cols()); }
  int layer_inputs(int layer) const { return layer == 0 ? input_channels : kernels; }

  /// Seeded initialization: N(0, 1/in) gains, centres uniform on the non-negative unit sphere.
  static SconvWeights seeded(const DescriptorConfig& cfg, int band_limit, int input_channels);
};

/**
 * Weight file: 16-byte header followed by little-endian float32 values.
 *
 *   offset 0   char[4]  magic "SPHW"
 *   offset 4   uint32   version (1)
 *   offset 8   uint32   layer count
 *   offset 12  uint32   K (VLAD clusters)
 *   offset 16  float32  gains, layer by layer, index order (kernel, input, degree)
 *              float32  centres, index order (cluster, kernel)
 *
 * Band limit, input channels and kernels per layer come from the caller
 * and are checked against the payload length.
 */
SconvWeights read_weight_file(const std::filesystem::path& path, const DescriptorConfig& cfg, int band_limit,
                              int input_channels);
void write_weight_file(const std::filesystem::path& path, const SconvWeights& weights);

/// Descriptor backend bound to one band limit and channel count; immutable and shareable.
class DescriptorExtractor {
 public:
  DescriptorExtractor(const DescriptorConfig& cfg, int band_limit, int input_channels = 3);

  const DescriptorConfig& config() const { return cfg_; }
  int band_limit() const { return band_limit_; }
  int input_channels() const { return input_channels_; }
  int dim() const;
  const SconvWeights& weights() const { return weights_; }

  PlaceDescriptor extract(const SphericalImaged& image) const;
  PlaceDescriptor extract(const SHSpectrumd& spectrum) const;

  /// Spectrum of the first filtering stage after the magnitude nonlinearity.
  SHSpectrumd first_layer_features(const SphericalImaged& image) const;

 private:
  SHSpectrumd filter(const SHSpectrumd& in, int layer) const;
  PlaceDescriptor power_spectrum(const SHSpectrumd& spectrum) const;
  PlaceDescriptor sconv_vlad(const SHSpectrumd& spectrum) const;

  DescriptorConfig cfg_;
  int band_limit_;
  int input_channels_;
  SconvWeights weights_;
};

/// Convenience wrapper that builds an extractor for the image's shape.
PlaceDescriptor extract_descriptor(const SphericalImaged& image, const DescriptorConfig& cfg);

}  // namespace sphereloc
