#include <algorithm>
#include <cmath>
#include <numeric>

#include "sphereloc/localizer.hpp"
#include "sphereloc/parallel.hpp"

namespace sphereloc {

void HierarchyConfig::validate() const {
  if (!(alpha > 1.0)) throw ConfigError("alpha must be > 1");
  if (l_max < 1) throw ConfigError("l_max must be >= 1");
  if (!(base_altitude > 0.0)) throw ConfigError("base_altitude must be > 0");
  if (!(r_olp >= 0.0 && r_olp < 1.0)) throw ConfigError("r_olp must lie in [0, 1)");
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) throw ConfigError("keep_fraction must lie in (0, 1]");
  if (!(cull_fraction >= 0.10 && cull_fraction <= 0.30)) throw ConfigError("cull_fraction must lie in [0.10, 0.30]");
  if (!(neff_threshold > 0.0 && neff_threshold <= 1.0)) throw ConfigError("neff_threshold must lie in (0, 1]");
  if (max_iters_per_level < 1) throw ConfigError("max_iters_per_level must be >= 1");
  if (!(jitter_factor >= 0.0)) throw ConfigError("jitter_factor must be >= 0");
  if (!(similarity_exponent > 0.0)) throw ConfigError("similarity_exponent must be > 0");
  if (!(min_match_similarity >= -1.0 && min_match_similarity < 1.0))
    throw ConfigError("min_match_similarity must lie in [-1, 1)");
  if (particle_cap < 1) throw ConfigError("particle_cap must be >= 1");
}

double HierarchyConfig::altitude(int level) const {
  if (level < 0 || level >= l_max) throw ConfigError("altitude: level out of range");
  if (l_max == 1) return alpha * base_altitude;
  const double t = double(level) / double(l_max - 1);
  return base_altitude * std::pow(alpha, 1.0 - t);
}

std::size_t lattice_count(double extent_x, double extent_y, double altitude, double r_olp) {
  const double s = altitude * (1.0 - r_olp);
  if (!(s > 0.0)) throw ConfigError("lattice spacing must be > 0");
  return static_cast<std::size_t>(std::ceil(extent_x * extent_y / (s * s)));
}

std::size_t initial_particle_count(const OverheadMap& map, const HierarchyConfig& cfg) {
  cfg.validate();
  const std::size_t n = lattice_count(map.extent_x(), map.extent_y(), cfg.altitude(0), cfg.r_olp);
  if (n > cfg.particle_cap) throw ConfigError("initial particle count exceeds particle_cap");
  return n;
}

namespace {

struct Bounds {
  double x0, y0, x1, y1;
};

Bounds ground_bounds(const OverheadMap& map) {
  const double x0 = map.origin_x() - 0.5 * map.gsd();
  const double y0 = map.origin_y() - 0.5 * map.gsd();
  return {x0, y0, x0 + map.extent_x(), y0 + map.extent_y()};
}

}  // namespace

std::vector<Eigen::Vector2d> uniform_lattice(const OverheadMap& map, std::size_t count) {
  std::vector<Eigen::Vector2d> points;
  if (count == 0) return points;
  const Bounds b = ground_bounds(map);
  const double mx = map.extent_x(), my = map.extent_y();
  const auto rows = static_cast<std::size_t>(
      std::clamp<double>(std::round(std::sqrt(double(count) * my / mx)), 1.0, double(count)));
  points.reserve(count);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t in_row = count / rows + (r < count % rows ? 1 : 0);
    const double y = b.y0 + (double(r) + 0.5) * my / double(rows);
    for (std::size_t i = 0; i < in_row; ++i) points.emplace_back(b.x0 + (double(i) + 0.5) * mx / double(in_row), y);
  }
  return points;
}

ParticleSet init_particles(const OverheadMap& map, const HierarchyConfig& cfg) {
  const std::size_t n = initial_particle_count(map, cfg);
  ParticleSet ps;
  ps.rng_seed = cfg.seed;
  ps.initial_count = n;
  ps.normalized = true;
  for (const auto& p : uniform_lattice(map, n)) ps.particles.push_back({p.x(), p.y(), 1.0 / double(n), 0});
  return ps;
}

PlaceModel::PlaceModel(RenderSpec render, const DescriptorConfig& descriptor)
    : render_(render), extractor_(descriptor, render.band_limit, 3) {}

SphericalImaged PlaceModel::view(const OverheadMap& map, double x, double y, double altitude, double yaw) const {
  return render_view(map, Pose{x, y, altitude, yaw, 0.0}, render_).image;
}

PlaceDescriptor PlaceModel::describe(const OverheadMap& map, double x, double y, double altitude) const {
  return describe(view(map, x, y, altitude));
}

double effective_sample_size(const ParticleSet& ps) {
  if (!ps.normalized) throw ContractError("effective_sample_size: particle set is not normalized");
  if (ps.particles.empty()) throw ContractError("effective_sample_size: empty particle set");
  double sq = 0.0;
  for (const auto& p : ps.particles) sq += p.weight * p.weight;
  return 1.0 / sq;
}

double similarity_weight(double similarity, double exponent) {
  return similarity > 0.0 ? std::pow(similarity, exponent) : 0.0;
}

ParticleSet weigh_particles(const ParticleSet& ps, const PlaceDescriptor& query, const OverheadMap& map,
                            const PlaceModel& model, const HierarchyConfig& cfg, int level,
                            std::vector<double>* similarities) {
  const double altitude = cfg.altitude(level);
  std::vector<double> sims(ps.size());
  parallel_for(ps.size(), [&](std::size_t i) {
    const Particle& p = ps.particles[i];
    sims[i] = similarity(model.describe(map, p.x, p.y, altitude), query);
  });

  ParticleSet out = ps;
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.particles[i].weight = similarity_weight(sims[i], cfg.similarity_exponent);
    out.particles[i].level = level;
    total += out.particles[i].weight;
  }
  if (total > 0.0) {
    for (auto& p : out.particles) p.weight /= total;
  } else {
    for (auto& p : out.particles) p.weight = 1.0 / double(out.size());
    out.diverged = true;
  }
  out.normalized = true;
  if (similarities) *similarities = std::move(sims);
  return out;
}

namespace {

// Keeps the highest-weight (1 - cull) share, then draws `target` particles
// by systematic resampling with Gaussian jitter of the given sigma.
ParticleSet cull_and_resample(const ParticleSet& ps, const OverheadMap& map, const HierarchyConfig& cfg,
                              std::size_t target, double sigma, int new_level, std::mt19937_64& rng) {
  if (ps.particles.empty()) throw ContractError("resample: empty particle set");
  std::vector<std::size_t> order(ps.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ps.particles[a].weight > ps.particles[b].weight; });
  const auto culled = static_cast<std::size_t>(std::floor(cfg.cull_fraction * double(ps.size())));
  const std::size_t survivors = std::max<std::size_t>(1, ps.size() - culled);
  order.resize(survivors);
  std::sort(order.begin(), order.end());  // back to lattice order for a stable draw

  std::vector<double> cumulative(survivors);
  double total = 0.0;
  for (std::size_t i = 0; i < survivors; ++i) cumulative[i] = (total += ps.particles[order[i]].weight);
  const bool flat = !(total > 0.0);
  if (flat)
    for (std::size_t i = 0; i < survivors; ++i) cumulative[i] = double(i + 1);
  const double scale = flat ? double(survivors) : total;

  std::uniform_real_distribution<double> start(0.0, 1.0 / double(target));
  std::normal_distribution<double> jitter(0.0, 1.0);
  const double u0 = start(rng);
  const Bounds b = ground_bounds(map);

  ParticleSet out;
  out.rng_seed = ps.rng_seed;
  out.initial_count = ps.initial_count;
  out.diverged = ps.diverged;
  out.normalized = true;
  out.particles.reserve(target);
  std::size_t idx = 0;
  for (std::size_t k = 0; k < target; ++k) {
    const double u = (u0 + double(k) / double(target)) * scale;
    while (idx + 1 < survivors && cumulative[idx] < u) ++idx;
    const Particle& src = ps.particles[order[idx]];
    Particle p;
    p.x = std::clamp(src.x + sigma * jitter(rng), b.x0, b.x1);
    p.y = std::clamp(src.y + sigma * jitter(rng), b.y0, b.y1);
    p.weight = 1.0 / double(target);
    p.level = new_level;
    out.particles.push_back(p);
  }
  return out;
}

std::size_t level_count(const ParticleSet& ps, const HierarchyConfig& cfg, int level) {
  const std::size_t base = ps.initial_count ? ps.initial_count : ps.size();
  return std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(double(base) * std::pow(cfg.keep_fraction, level) - 1e-9)));
}

}  // namespace

ParticleSet resample_and_descend(const ParticleSet& ps, const OverheadMap& map, const HierarchyConfig& cfg, int level,
                                 std::mt19937_64& rng) {
  cfg.validate();
  if (level < 0 || level + 1 >= cfg.l_max) throw ContractError("resample_and_descend: no finer level to descend to");
  const double sigma = cfg.jitter_factor * cfg.altitude(level + 1);
  return cull_and_resample(ps, map, cfg, level_count(ps, cfg, level + 1), sigma, level + 1, rng);
}

ParticleSet resample_and_descend(const ParticleSet& ps, const OverheadMap& map, const HierarchyConfig& cfg, int level) {
  std::mt19937_64 rng(ps.rng_seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(level + 1));
  return resample_and_descend(ps, map, cfg, level, rng);
}

ParticleSet resample_in_level(const ParticleSet& ps, const OverheadMap& map, const HierarchyConfig& cfg, int level,
                              std::mt19937_64& rng) {
  const double sigma = cfg.jitter_factor * cfg.altitude(level);
  return cull_and_resample(ps, map, cfg, ps.size(), sigma, level, rng);
}

}  // namespace sphereloc
