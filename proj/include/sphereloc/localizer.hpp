#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <vector>

#include "sphereloc/descriptor.hpp"
#include "sphereloc/geo.hpp"

namespace sphereloc {

/**
 * Coarse-to-fine search schedule.
 *
 * Level 0 flies at alpha * base_altitude, the last level at base_altitude,
 * with geometric spacing in between.
 */
struct HierarchyConfig {
  double alpha = 3.0;
  int l_max = 3;
  double base_altitude = 40.0;  ///< H1, metres
  double r_olp = 0.5;           ///< footprint overlap ratio in [0, 1)
  double keep_fraction = 0.8;   ///< particle count ratio between successive levels
  double cull_fraction = 0.2;   ///< lowest-weight share dropped before resampling, in [0.10, 0.30]
  double neff_threshold = 0.5;  ///< converged once N_eff <= neff_threshold * N
  int max_iters_per_level = 1;
  double jitter_factor = 0.25;       ///< resampling jitter sigma = jitter_factor * altitude
  double similarity_exponent = 1.0;  ///< weight = max(0, cos)^exponent
  double min_match_similarity = 0.0;  ///< runs whose best final similarity falls below this are flagged diverged
  std::size_t particle_cap = 1'000'000;
  std::uint64_t seed = 0;

  void validate() const;
  double altitude(int level) const;
  /// Lattice spacing H (1 - R_olp) at a given altitude.
  double spacing(double altitude) const { return altitude * (1.0 - r_olp); }
};

struct Particle {
  double x = 0.0;
  double y = 0.0;
  double weight = 0.0;
  int level = 0;
};

struct ParticleSet {
  std::vector<Particle> particles;
  bool normalized = false;
  bool diverged = false;          ///< set when every weight came out zero
  std::uint64_t rng_seed = 0;
  std::size_t initial_count = 0;  ///< P_init at the coarsest level

  std::size_t size() const { return particles.size(); }
};

/// Ceil(M1 * M2 / (H (1 - R_olp))^2).
std::size_t lattice_count(double extent_x, double extent_y, double altitude, double r_olp);

/// P_init for the coarsest level; throws ConfigError above the particle cap.
std::size_t initial_particle_count(const OverheadMap& map, const HierarchyConfig& cfg);

/**
 * Exactly `count` points spread uniformly over the map: rows of equal
 * height, each holding an (almost) equal share of points at even spacing.
 */
std::vector<Eigen::Vector2d> uniform_lattice(const OverheadMap& map, std::size_t count);

ParticleSet init_particles(const OverheadMap& map, const HierarchyConfig& cfg);

/// Renders and describes the view at a ground position and altitude.
class PlaceModel {
 public:
  PlaceModel(RenderSpec render, const DescriptorConfig& descriptor);

  const RenderSpec& render_spec() const { return render_; }
  const DescriptorExtractor& extractor() const { return extractor_; }

  SphericalImaged view(const OverheadMap& map, double x, double y, double altitude, double yaw = 0.0) const;
  PlaceDescriptor describe(const SphericalImaged& view) const { return extractor_.extract(view); }
  PlaceDescriptor describe(const OverheadMap& map, double x, double y, double altitude) const;

 private:
  RenderSpec render_;
  DescriptorExtractor extractor_;
};

/// 1 / sum w^2; requires a normalized set.
double effective_sample_size(const ParticleSet& ps);

/// Weight from a similarity: max(0, s)^exponent.
double similarity_weight(double similarity, double exponent);

/**
 * Sets w_i = max(0, cos(S_i, S_c))^exponent from views rendered at each
 * particle and the level's altitude, then normalizes.  All-zero weights
 * fall back to uniform and mark the set diverged.  Evaluation is spread
 * over worker threads; the normalization sum runs in particle order.
 */
ParticleSet weigh_particles(const ParticleSet& ps, const PlaceDescriptor& query, const OverheadMap& map,
                            const PlaceModel& model, const HierarchyConfig& cfg, int level,
                            std::vector<double>* similarities = nullptr);

/**
 * Drops the lowest-weight cull_fraction, systematically resamples the
 * survivors to ceil(P_init * keep_fraction^(level+1)) particles, jitters
 * them with sigma = jitter_factor * altitude(level + 1) and moves them to
 * the next level.
 */
ParticleSet resample_and_descend(const ParticleSet& ps, const OverheadMap& map, const HierarchyConfig& cfg, int level,
                                 std::mt19937_64& rng);
ParticleSet resample_and_descend(const ParticleSet& ps, const OverheadMap& map, const HierarchyConfig& cfg, int level);

/// Same cull-and-resample step without changing level or particle count.
ParticleSet resample_in_level(const ParticleSet& ps, const OverheadMap& map, const HierarchyConfig& cfg, int level,
                              std::mt19937_64& rng);

struct TraceRecord {
  int level = 0;
  int iteration = 0;
  double altitude = 0.0;
  double n_eff = 0.0;
  std::size_t eval_count = 0;  ///< cumulative descriptor evaluations
  std::vector<Particle> particles;
};

struct LocalizationResult {
  Eigen::Vector2d estimate = Eigen::Vector2d::Zero();
  double yaw = 0.0;              ///< relative yaw of the query against the winning reference view
  double best_similarity = 0.0;  ///< similarity of the winning reference view
  std::size_t n_descriptor_evals = 0;
  bool diverged = false;         ///< no particle survived weighting, or the best match fell below min_match_similarity
  std::optional<bool> success;  ///< set when ground truth was supplied
  std::optional<double> error_m;
  std::vector<TraceRecord> trace;
};

/// Ground truth for scoring a run.
struct GroundTruth {
  double x = 0.0;
  double y = 0.0;
  double threshold_m = 20.0;
};

/**
 * Hierarchical global localization.  `query_views` holds one view per
 * level, coarsest (highest) first.
 */
LocalizationResult localize_hierarchical(const OverheadMap& map, const std::vector<SphericalImaged>& query_views,
                                         const PlaceModel& model, const HierarchyConfig& cfg,
                                         std::optional<GroundTruth> truth = std::nullopt);

/// Reference descriptors on the lattice at spacing H (1 - R_olp); independent of any query.
struct ReferenceGrid {
  double altitude = 0.0;
  std::vector<Eigen::Vector2d> cells;
  std::vector<PlaceDescriptor> descriptors;

  std::size_t size() const { return cells.size(); }
};

/// Throws ConfigError when the lattice exceeds cfg.particle_cap.
ReferenceGrid build_reference_grid(const OverheadMap& map, double altitude, const PlaceModel& model,
                                   const HierarchyConfig& cfg);

/// Exhaustive search over the lattice at spacing H (1 - R_olp) at `altitude`.
LocalizationResult localize_bruteforce(const OverheadMap& map, const SphericalImaged& query_view, double altitude,
                                       const PlaceModel& model, const HierarchyConfig& cfg,
                                       std::optional<GroundTruth> truth = std::nullopt);
/// Same search against a prebuilt grid; one similarity evaluation per cell.
LocalizationResult localize_bruteforce(const OverheadMap& map, const ReferenceGrid& grid,
                                       const SphericalImaged& query_view, const PlaceModel& model,
                                       const HierarchyConfig& cfg, std::optional<GroundTruth> truth = std::nullopt);

/// alpha^2 / sum_{i < l_max} 0.8^i: brute-force over hierarchical evaluation count.
double predicted_speedup(const HierarchyConfig& cfg);

/// Writes the trace as JSON lines, one record per iteration.
void write_trace_jsonl(std::ostream& out, const std::vector<TraceRecord>& trace);

}  // namespace sphereloc
