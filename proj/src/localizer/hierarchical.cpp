#include <cmath>

#include "sphereloc/localizer.hpp"
#include "sphereloc/orientation.hpp"
#include "sphereloc/parallel.hpp"

namespace sphereloc {

namespace {

TraceRecord snapshot(const ParticleSet& ps, int level, int iteration, double altitude, double n_eff,
                     std::size_t evals) {
  return TraceRecord{level, iteration, altitude, n_eff, evals, ps.particles};
}

void score(LocalizationResult& r, const std::optional<GroundTruth>& truth) {
  if (!truth) return;
  r.error_m = (r.estimate - Eigen::Vector2d(truth->x, truth->y)).norm();
  r.success = *r.error_m <= truth->threshold_m;
}

double relative_yaw(const SphericalImaged& query, const SphericalImaged& reference, const PlaceModel& model) {
  try {
    return estimate_yaw(query, reference, model.extractor()).yaw;
  } catch (const DegenerateInput&) {
    return 0.0;
  }
}

}  // namespace

LocalizationResult localize_hierarchical(const OverheadMap& map, const std::vector<SphericalImaged>& query_views,
                                         const PlaceModel& model, const HierarchyConfig& cfg,
                                         std::optional<GroundTruth> truth) {
  cfg.validate();
  if (static_cast<int>(query_views.size()) != cfg.l_max)
    throw InvalidInput("localize_hierarchical: expected one query view per level");

  std::mt19937_64 rng(cfg.seed);
  LocalizationResult result;
  ParticleSet ps = init_particles(map, cfg);
  std::vector<double> sims;
  const int finest = cfg.l_max - 1;

  for (int level = 0; level < cfg.l_max; ++level) {
    const PlaceDescriptor query = model.describe(query_views[level]);
    for (int it = 0; it < cfg.max_iters_per_level; ++it) {
      ps = weigh_particles(ps, query, map, model, cfg, level, &sims);
      result.n_descriptor_evals += ps.size();
      const double n_eff = effective_sample_size(ps);
      result.trace.push_back(snapshot(ps, level, it, cfg.altitude(level), n_eff, result.n_descriptor_evals));
      if (n_eff <= cfg.neff_threshold * double(ps.size()) || it + 1 == cfg.max_iters_per_level) break;
      ps = resample_in_level(ps, map, cfg, level, rng);
    }
    if (level < finest) ps = resample_and_descend(ps, map, cfg, level, rng);
  }

  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  std::size_t best = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    mean += ps.particles[i].weight * Eigen::Vector2d(ps.particles[i].x, ps.particles[i].y);
    if (sims[i] > sims[best]) best = i;
  }
  result.estimate = mean;
  result.best_similarity = sims[best];
  result.diverged = ps.diverged || result.best_similarity < cfg.min_match_similarity;
  const Particle& winner = ps.particles[best];
  result.yaw = relative_yaw(query_views[finest], model.view(map, winner.x, winner.y, cfg.altitude(finest)), model);
  score(result, truth);
  return result;
}

ReferenceGrid build_reference_grid(const OverheadMap& map, double altitude, const PlaceModel& model,
                                   const HierarchyConfig& cfg) {
  cfg.validate();
  if (!(altitude > 0.0)) throw InvalidInput("build_reference_grid: altitude must be > 0");
  const std::size_t n = lattice_count(map.extent_x(), map.extent_y(), altitude, cfg.r_olp);
  if (n > cfg.particle_cap) throw ConfigError("brute-force lattice exceeds particle_cap");
  ReferenceGrid grid;
  grid.altitude = altitude;
  grid.cells = uniform_lattice(map, n);
  grid.descriptors.resize(n);
  parallel_for(n, [&](std::size_t i) {
    grid.descriptors[i] = model.describe(map, grid.cells[i].x(), grid.cells[i].y(), altitude);
  });
  return grid;
}

LocalizationResult localize_bruteforce(const OverheadMap& map, const SphericalImaged& query_view, double altitude,
                                       const PlaceModel& model, const HierarchyConfig& cfg,
                                       std::optional<GroundTruth> truth) {
  return localize_bruteforce(map, build_reference_grid(map, altitude, model, cfg), query_view, model, cfg, truth);
}

LocalizationResult localize_bruteforce(const OverheadMap& map, const ReferenceGrid& grid,
                                       const SphericalImaged& query_view, const PlaceModel& model,
                                       const HierarchyConfig& cfg, std::optional<GroundTruth> truth) {
  cfg.validate();
  const std::size_t n = grid.size();
  if (n == 0 || grid.descriptors.size() != n) throw InvalidInput("localize_bruteforce: empty reference grid");
  const PlaceDescriptor query = model.describe(query_view);

  std::vector<double> sims(n);
  for (std::size_t i = 0; i < n; ++i) sims[i] = similarity(grid.descriptors[i], query);
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (sims[i] > sims[best]) best = i;

  LocalizationResult result;
  result.estimate = grid.cells[best];
  result.best_similarity = sims[best];
  result.n_descriptor_evals = n;
  result.yaw = relative_yaw(query_view, model.view(map, grid.cells[best].x(), grid.cells[best].y(), grid.altitude),
                            model);

  ParticleSet ps;
  ps.normalized = true;
  ps.initial_count = n;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ps.particles.push_back({grid.cells[i].x(), grid.cells[i].y(), similarity_weight(sims[i], cfg.similarity_exponent), 0});
    total += ps.particles.back().weight;
  }
  result.diverged = !(total > 0.0) || result.best_similarity < cfg.min_match_similarity;
  for (auto& p : ps.particles) p.weight = total > 0.0 ? p.weight / total : 1.0 / double(n);
  result.trace.push_back(snapshot(ps, 0, 0, grid.altitude, effective_sample_size(ps), n));
  score(result, truth);
  return result;
}

double predicted_speedup(const HierarchyConfig& cfg) {
  cfg.validate();
  double levels = 0.0;
  for (int i = 0; i < cfg.l_max; ++i) levels += std::pow(cfg.keep_fraction, i);
  return cfg.alpha * cfg.alpha / levels;
}

}  // namespace sphereloc
