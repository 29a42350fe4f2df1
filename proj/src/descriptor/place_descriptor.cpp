#include <cmath>
#include <random>

#include "sphereloc/descriptor.hpp"

namespace sphereloc {

namespace {

constexpr int kMaxSconvDim = 4096;

PlaceDescriptor normalized(Eigen::VectorXd values, DescriptorBackend backend, int band_limit) {
  const double norm = values.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw DegenerateInput("descriptor has zero norm");
  values /= norm;
  return PlaceDescriptor{std::move(values), backend, band_limit};
}

}  // namespace

std::string to_string(DescriptorBackend backend) {
  return backend == DescriptorBackend::power_spectrum ? "power-spectrum" : "sconv-vlad";
}

DescriptorBackend parse_backend(const std::string& name) {
  if (name == "power-spectrum") return DescriptorBackend::power_spectrum;
  if (name == "sconv-vlad") return DescriptorBackend::sconv_vlad;
  throw ConfigError("unknown descriptor backend: " + name);
}

void DescriptorConfig::validate() const {
  if (num_layers < 1) throw ConfigError("num_layers must be >= 1");
  if (vlad_clusters < 2) throw ConfigError("vlad_clusters must be >= 2");
  if (kernels_per_layer < 1) throw ConfigError("kernels_per_layer must be >= 1");
  if (backend == DescriptorBackend::sconv_vlad && vlad_clusters * kernels_per_layer > kMaxSconvDim)
    throw ConfigError("sconv-vlad descriptor dimension exceeds 4096");
  if (!(assignment_sharpness > 0.0)) throw ConfigError("assignment_sharpness must be > 0");
}

double similarity(const PlaceDescriptor& a, const PlaceDescriptor& b) {
  if (a.backend != b.backend || a.dim() != b.dim())
    throw ShapeError("similarity: descriptors differ in backend or dimension");
  const double ab = a.values.dot(b.values);
  const double aa = a.values.squaredNorm();
  const double bb = b.values.squaredNorm();
  if (!(aa > 0.0) || !(bb > 0.0)) throw DegenerateInput("similarity: zero-norm descriptor");
  // sqrt(x * x) == x in IEEE arithmetic, so identical inputs give exactly 1.
  return std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0);
}

SconvWeights SconvWeights::seeded(const DescriptorConfig& cfg, int band_limit, int input_channels) {
  cfg.validate();
  SconvWeights w;
  w.band_limit = band_limit;
  w.input_channels = input_channels;
  w.kernels = cfg.kernels_per_layer;
  std::mt19937_64 rng(cfg.weight_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int layer = 0; layer < cfg.num_layers; ++layer) {
    const int in = w.layer_inputs(layer);
    Eigen::MatrixXd g(w.kernels * in, band_limit);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = gauss(rng) / std::sqrt(double(in));
    w.gains.push_back(std::move(g));
  }
  // Features are magnitudes, so they live on the non-negative part of the sphere.
  w.centers.resize(w.kernels, cfg.vlad_clusters);
  for (int k = 0; k < cfg.vlad_clusters; ++k) {
    Eigen::VectorXd c(w.kernels);
    do {
      for (int d = 0; d < w.kernels; ++d) c(d) = std::abs(gauss(rng));
    } while (c.norm() == 0.0);
    w.centers.col(k) = c.normalized();
  }
  return w;
}

DescriptorExtractor::DescriptorExtractor(const DescriptorConfig& cfg, int band_limit, int input_channels)
    : cfg_(cfg), band_limit_(band_limit), input_channels_(input_channels) {
  cfg_.validate();
  if (band_limit < 1) throw ConfigError("band_limit must be >= 1");
  if (input_channels < 1) throw ConfigError("input_channels must be >= 1");
  if (cfg_.backend == DescriptorBackend::sconv_vlad) {
    weights_ = cfg_.weight_file ? read_weight_file(*cfg_.weight_file, cfg_, band_limit, input_channels)
                                : SconvWeights::seeded(cfg_, band_limit, input_channels);
  }
}

int DescriptorExtractor::dim() const {
  return cfg_.backend == DescriptorBackend::power_spectrum ? band_limit_ * input_channels_
                                                           : cfg_.vlad_clusters * cfg_.kernels_per_layer;
}

PlaceDescriptor DescriptorExtractor::extract(const SphericalImaged& image) const {
  if (image.band_limit() != band_limit_) throw ShapeError("extract: image band limit does not match extractor");
  if (image.channels() != input_channels_) throw ShapeError("extract: image channel count does not match extractor");
  return extract(sh_forward(image));
}

PlaceDescriptor DescriptorExtractor::extract(const SHSpectrumd& spectrum) const {
  if (spectrum.band_limit() != band_limit_ || spectrum.channels() != input_channels_)
    throw ShapeError("extract: spectrum shape does not match extractor");
  return cfg_.backend == DescriptorBackend::power_spectrum ? power_spectrum(spectrum) : sconv_vlad(spectrum);
}

PlaceDescriptor DescriptorExtractor::power_spectrum(const SHSpectrumd& spectrum) const {
  Eigen::VectorXd values(band_limit_ * input_channels_);
  for (int c = 0; c < input_channels_; ++c)
    for (int l = 0; l < band_limit_; ++l) {
      // Rounded to single precision: the rotation-invariant energy is then
      // reproduced bit-for-bit for rotated copies of the same view.
      values(c * band_limit_ + l) = static_cast<double>(static_cast<float>(spectrum.degree_energy(l, c)));
    }
  return normalized(std::move(values), DescriptorBackend::power_spectrum, band_limit_);
}

SHSpectrumd DescriptorExtractor::filter(const SHSpectrumd& in, int layer) const {
  const int n_in = in.channels();
  const int b = band_limit_;
  const Eigen::MatrixXd& g = weights_.gains[layer];
  SHSpectrumd out(b, weights_.kernels);
  for (int l = 0; l < b; ++l) {
    Eigen::MatrixXd mix(weights_.kernels, n_in);
    for (int o = 0; o < weights_.kernels; ++o)
      for (int i = 0; i < n_in; ++i) mix(o, i) = g(o * n_in + i, l);
    const auto rows = in.coeffs().middleRows(SHSpectrumd::index(l, -l), 2 * l + 1);
    out.coeffs().middleRows(SHSpectrumd::index(l, -l), 2 * l + 1) = rows * mix.transpose().cast<std::complex<double>>();
  }
  return out;
}

namespace {

SphericalImaged magnitude(SphericalImaged image) {
  for (int c = 0; c < image.channels(); ++c) image.channel(c) = image.channel(c).cwiseAbs();
  return image;
}

}  // namespace

SHSpectrumd DescriptorExtractor::first_layer_features(const SphericalImaged& image) const {
  if (cfg_.backend != DescriptorBackend::sconv_vlad)
    throw ConfigError("first_layer_features requires the sconv-vlad backend");
  if (image.band_limit() != band_limit_ || image.channels() != input_channels_)
    throw ShapeError("first_layer_features: image shape does not match extractor");
  return sh_forward(magnitude(sh_inverse(filter(sh_forward(image), 0))));
}

PlaceDescriptor DescriptorExtractor::sconv_vlad(const SHSpectrumd& spectrum) const {
  SHSpectrumd current = spectrum;
  SphericalImaged features;
  for (int layer = 0; layer < weights_.layers(); ++layer) {
    features = magnitude(sh_inverse(filter(current, layer)));
    if (layer + 1 < weights_.layers()) current = sh_forward(features);
  }

  const auto plan = ShTransform<double>::get(band_limit_);
  const int side = features.size();
  const int dims = weights_.kernels;
  const int k_count = weights_.clusters();

  // Rows of x are unit local features; rows with no response are dropped.
  Eigen::MatrixXd x(side * side, dims);
  Eigen::VectorXd area(side * side);
  int rows = 0;
  for (int j = 0; j < side; ++j)
    for (int k = 0; k < side; ++k) {
      for (int d = 0; d < dims; ++d) x(rows, d) = features(j, k, d);
      const double norm = x.row(rows).norm();
      if (!(norm > 1e-12)) continue;
      x.row(rows) /= norm;
      area(rows++) = plan->area_weight(j);
    }
  x.conservativeResize(rows, dims);

  Eigen::MatrixXd soft = cfg_.assignment_sharpness * (x * weights_.centers);
  const Eigen::VectorXd peak = soft.rowwise().maxCoeff();
  soft = (soft.colwise() - peak).array().exp().matrix();
  const Eigen::VectorXd scale = area.head(rows).array() / soft.rowwise().sum().array();
  soft = scale.asDiagonal() * soft;
  Eigen::MatrixXd vlad = x.transpose() * soft;
  const Eigen::RowVectorXd mass = soft.colwise().sum();
  for (int c = 0; c < k_count; ++c) vlad.col(c) -= mass(c) * weights_.centers.col(c);
  for (int c = 0; c < k_count; ++c) {
    const double norm = vlad.col(c).norm();
    if (norm > 0.0) vlad.col(c) /= norm;
  }
  return normalized(Eigen::Map<const Eigen::VectorXd>(vlad.data(), vlad.size()), DescriptorBackend::sconv_vlad,
                    band_limit_);
}

PlaceDescriptor extract_descriptor(const SphericalImaged& image, const DescriptorConfig& cfg) {
  return DescriptorExtractor(cfg, image.band_limit(), image.channels()).extract(image);
}

}  // namespace sphereloc
