#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "sphereloc/descriptor.hpp"

namespace sphereloc {

namespace {

constexpr std::array<char, 4> kMagic = {'S', 'P', 'H', 'W'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "weight files assume a little-endian host");

std::uint32_t read_u32(const char* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}

}  // namespace

SconvWeights read_weight_file(const std::filesystem::path& path, const DescriptorConfig& cfg, int band_limit,
                              int input_channels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("weight file: cannot open " + path.string());
  std::array<char, 16> header{};
  in.read(header.data(), header.size());
  if (in.gcount() != 16) throw ConfigError("weight file: truncated header");
  if (!std::equal(kMagic.begin(), kMagic.end(), header.begin())) throw ConfigError("weight file: bad magic");
  if (read_u32(header.data() + 4) != kVersion) throw ConfigError("weight file: unsupported version");
  const auto layers = static_cast<int>(read_u32(header.data() + 8));
  const auto clusters = static_cast<int>(read_u32(header.data() + 12));
  if (layers != cfg.num_layers) throw ConfigError("weight file: layer count does not match config");
  if (clusters != cfg.vlad_clusters) throw ConfigError("weight file: cluster count does not match config");

  SconvWeights w;
  w.band_limit = band_limit;
  w.input_channels = input_channels;
  w.kernels = cfg.kernels_per_layer;
  size_t expected = static_cast<size_t>(w.kernels) * clusters;
  for (int l = 0; l < layers; ++l) expected += static_cast<size_t>(w.kernels) * w.layer_inputs(l) * band_limit;

  std::vector<float> payload(expected);
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(expected * sizeof(float)));
  if (static_cast<size_t>(in.gcount()) != expected * sizeof(float) || in.peek() != std::char_traits<char>::eof())
    throw ConfigError("weight file: payload size does not match config shape");

  size_t pos = 0;
  for (int l = 0; l < layers; ++l) {
    const int inputs = w.layer_inputs(l);
    Eigen::MatrixXd g(w.kernels * inputs, band_limit);
    for (int row = 0; row < g.rows(); ++row)
      for (int deg = 0; deg < band_limit; ++deg) g(row, deg) = payload[pos++];
    w.gains.push_back(std::move(g));
  }
  w.centers.resize(w.kernels, clusters);
  for (int c = 0; c < clusters; ++c) {
    for (int d = 0; d < w.kernels; ++d) w.centers(d, c) = payload[pos++];
    const double norm = w.centers.col(c).norm();
    if (!(norm > 0.0)) throw ConfigError("weight file: zero VLAD centre");
    w.centers.col(c) /= norm;
  }
  return w;
}

void write_weight_file(const std::filesystem::path& path, const SconvWeights& weights) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("weight file: cannot write " + path.string());
  out.write(kMagic.data(), 4);
  const std::uint32_t head[3] = {kVersion, static_cast<std::uint32_t>(weights.layers()),
                                 static_cast<std::uint32_t>(weights.clusters())};
  out.write(reinterpret_cast<const char*>(head), sizeof(head));
  auto put = [&](double v) {
    const float f = static_cast<float>(v);
    out.write(reinterpret_cast<const char*>(&f), sizeof(f));
  };
  for (const auto& g : weights.gains)
    for (int row = 0; row < g.rows(); ++row)
      for (int deg = 0; deg < g.cols(); ++deg) put(g(row, deg));
  for (int c = 0; c < weights.clusters(); ++c)
    for (int d = 0; d < weights.kernels; ++d) put(weights.centers(d, c));
}

}  // namespace sphereloc
