#include <algorithm>
#include <cmath>
#include <numbers>
#include <array>
#include <random>

#include "sphereloc/eval.hpp"

namespace sphereloc {

void SyntheticWorldSpec::validate() const {
  if (!(extent_m.x() > 0.0 && extent_m.y() > 0.0)) throw InvalidInput("world extent must be positive");
  if (!(gsd > 0.0)) throw InvalidInput("world gsd must be > 0");
  if (landmark_count < 0) throw InvalidInput("landmark_count must be >= 0");
  if (texture_octaves < 1) throw InvalidInput("texture_octaves must be >= 1");
  if (extent_m.x() / gsd > 20000.0 || extent_m.y() / gsd > 20000.0)
    throw InvalidInput("world raster exceeds 20000 px per side");
}

namespace {

constexpr double kBaseCell = 128.0;   // metres, base colour and amplitude fields
constexpr double kDetailCell = 32.0;  // metres, coarsest detail octave

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

// One octave of value noise on a lattice of `cell` metres.
class ValueNoise {
 public:
  ValueNoise(double extent_x, double extent_y, double cell, std::mt19937_64& rng)
      : cell_(cell),
        nx_(static_cast<int>(std::ceil(extent_x / cell)) + 2),
        ny_(static_cast<int>(std::ceil(extent_y / cell)) + 2),
        values_(static_cast<std::size_t>(nx_) * ny_) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& v : values_) v = u(rng);
  }

  double operator()(double x, double y) const {
    const double gx = x / cell_, gy = y / cell_;
    const int i = static_cast<int>(gx), j = static_cast<int>(gy);
    const double fx = smooth(gx - i), fy = smooth(gy - j);
    const double top = (1 - fx) * at(i, j) + fx * at(i + 1, j);
    const double bottom = (1 - fx) * at(i, j + 1) + fx * at(i + 1, j + 1);
    return (1 - fy) * top + fy * bottom;
  }

 private:
  double at(int i, int j) const { return values_[static_cast<std::size_t>(j) * nx_ + i]; }

  double cell_;
  int nx_, ny_;
  std::vector<double> values_;
};

struct Polygon {
  std::vector<Eigen::Vector2d> vertices;  // counter-clockwise
  std::array<std::uint8_t, 3> colour;

  bool contains(const Eigen::Vector2d& p) const {
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      const Eigen::Vector2d a = vertices[i], b = vertices[(i + 1) % vertices.size()];
      const double cross = (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
      if (cross < 0.0) return false;
    }
    return true;
  }
};

}  // namespace

OverheadMap generate_world(const SyntheticWorldSpec& spec) {
  spec.validate();
  const int width = static_cast<int>(std::round(spec.extent_m.x() / spec.gsd));
  const int height = static_cast<int>(std::round(spec.extent_m.y() / spec.gsd));
  std::mt19937_64 rng(spec.seed);

  // Per channel: a slow base colour, a slow detail-amplitude field and
  // `texture_octaves` detail octaves starting at kDetailCell.
  std::vector<ValueNoise> base;
  std::vector<std::vector<ValueNoise>> detail(3), amplitude(3);
  for (int c = 0; c < 3; ++c) {
    base.emplace_back(spec.extent_m.x(), spec.extent_m.y(), kBaseCell, rng);
    for (int o = 0; o < spec.texture_octaves; ++o) {
      amplitude[c].emplace_back(spec.extent_m.x(), spec.extent_m.y(), kBaseCell, rng);
      detail[c].emplace_back(spec.extent_m.x(), spec.extent_m.y(), kDetailCell / std::pow(2.0, o), rng);
    }
  }

  std::vector<Polygon> landmarks;
  std::uniform_real_distribution<double> ux(0.0, spec.extent_m.x()), uy(0.0, spec.extent_m.y());
  std::uniform_real_distribution<double> radius(12.0, 35.0), unit(0.0, 1.0);
  std::uniform_int_distribution<int> sides(3, 8), colour(1, 6);
  for (int k = 0; k < spec.landmark_count; ++k) {
    const Eigen::Vector2d centre(ux(rng), uy(rng));
    const double r = radius(rng);
    const int n = sides(rng);
    std::vector<double> angles(n);
    for (auto& a : angles) a = 2.0 * std::numbers::pi * unit(rng);
    std::sort(angles.begin(), angles.end());
    Polygon poly;
    for (double a : angles) poly.vertices.push_back(centre + r * Eigen::Vector2d(std::cos(a), std::sin(a)));
    const int bits = colour(rng);  // never all-black or all-white
    for (int c = 0; c < 3; ++c) poly.colour[c] = (bits >> c) & 1 ? 255 : 0;
    landmarks.push_back(std::move(poly));
  }

  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(width) * height * 3);
  double norm = 0.0;
  for (int o = 0; o < spec.texture_octaves; ++o) norm += std::pow(0.5, o);
  for (int row = 0; row < height; ++row) {
    for (int col = 0; col < width; ++col) {
      const Eigen::Vector2d p(col * spec.gsd, row * spec.gsd);
      std::uint8_t* px = &rgb[(static_cast<std::size_t>(row) * width + col) * 3];
      const Polygon* hit = nullptr;
      for (const auto& poly : landmarks)
        if (poly.contains(p)) hit = &poly;
      for (int c = 0; c < 3; ++c) {
        if (hit) {
          px[c] = hit->colour[c];
          continue;
        }
        double d = 0.0;
        for (int o = 0; o < spec.texture_octaves; ++o)
          d += std::pow(0.5, o) * amplitude[c][o](p.x(), p.y()) * (detail[c][o](p.x(), p.y()) - 0.5);
        const double v = base[c](p.x(), p.y()) + d / norm;
        px[c] = static_cast<std::uint8_t>(std::clamp(64.0 + std::floor(128.0 * v), 64.0, 191.0));
      }
    }
  }
  return OverheadMap(width, height, spec.gsd, 0.0, 0.0, std::move(rgb));
}

}  // namespace sphereloc
