#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "sphereloc/descriptor.hpp"
#include "sphereloc/geo.hpp"
#include "sphereloc/localizer.hpp"

namespace sphereloc {

struct Query {
  SphericalImaged view;
  Pose pose;
  PlaceDescriptor descriptor;  ///< filled by describe_queries
};

struct Reference {
  PlaceDescriptor descriptor;
  Pose pose;
};

struct QuerySet {
  std::vector<Query> queries;
  std::vector<Reference> references;
  double threshold_m = 20.0;

  void validate() const;
};

/// Fills every query's descriptor from its view.
void describe_queries(QuerySet& qs, const DescriptorExtractor& extractor);

/// Reference descriptors on the uniform lattice at spacing H (1 - r_olp).
std::vector<Reference> lattice_references(const OverheadMap& map, const PlaceModel& model, double altitude,
                                          double r_olp);

/// Fraction of queries whose n most similar references include one within threshold_m.
double recall_at_n(const QuerySet& qs, int n);

/// Top-1 retrieval for one query.
struct Retrieval {
  std::size_t query_id = 0;
  std::size_t best_match_id = 0;
  double similarity = 0.0;
  double dist_m = 0.0;
  double yaw_err_rad = 0.0;
};

/// Top-1 match per query; ties go to the lower reference index.
std::vector<Retrieval> retrieve_top1(const QuerySet& qs);

/// Per-query dump: query_id,best_match_id,similarity,dist_m,yaw_err_rad.
void write_retrievals_csv(std::ostream& out, const std::vector<Retrieval>& rows);
std::vector<Retrieval> read_retrievals_csv(std::istream& in);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

/**
 * TPR/FPR per similarity threshold.  A query is predicted positive when its
 * top-1 similarity is >= the threshold; it is a true positive when that match
 * lies within threshold_m.  Rates with an empty denominator are 0.
 */
std::vector<RocPoint> roc_curve(const std::vector<Retrieval>& top1, double threshold_m,
                                const std::vector<double>& thresholds);
std::vector<RocPoint> roc_curve(const QuerySet& qs, const std::vector<double>& thresholds);

/// Trapezoidal area under the curve, closed with (0, 0) and (1, 1).
double roc_auc(const std::vector<RocPoint>& curve);

struct SyntheticWorldSpec {
  Eigen::Vector2d extent_m{1000.0, 500.0};
  double gsd = 1.0;
  int landmark_count = 10;
  int texture_octaves = 4;
  std::uint64_t seed = 0;

  void validate() const;
};

/**
 * Value-noise background in [64, 191] with `landmark_count` convex polygons
 * whose channels are each 0 or 255 (never grey).  Bit-identical under seed.
 */
OverheadMap generate_world(const SyntheticWorldSpec& spec);

struct TrajectoryRow {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double altitude = 0.0;
  double yaw = 0.0;
};

/// CSV with header timestamp,x,y,altitude,yaw; timestamps strictly increasing.
std::vector<TrajectoryRow> read_trajectory(std::istream& in);
std::vector<TrajectoryRow> read_trajectory(const std::filesystem::path& path);

/// Linear interpolation at `rate_hz` from the first timestamp; yaw follows the shorter arc.
std::vector<TrajectoryRow> interpolate_trajectory(const std::vector<TrajectoryRow>& rows, double rate_hz = 1.0);

/// Reads, interpolates and renders one query view per pose.  Poses off the map throw OutOfBounds.
QuerySet ingest_trajectory(const std::filesystem::path& path, const OverheadMap& map, const PlaceModel& model,
                           double rate_hz = 1.0, double threshold_m = 20.0);

/// Render, descriptor and search settings tuned for the synthetic worlds.
struct LocalizationPreset {
  RenderSpec render;
  DescriptorConfig descriptor;
  HierarchyConfig hierarchy;

  PlaceModel model() const { return PlaceModel(render, descriptor); }
};

/**
 * B = 32 spherical views with the default sky crop, a one-layer
 * sconv-vlad descriptor, weights cos^10000 and a 0.9995 match floor.
 */
LocalizationPreset synthetic_preset();

/// Renders the per-level query views for a ground pose, coarsest first.
std::vector<SphericalImaged> level_views(const OverheadMap& map, const PlaceModel& model,
                                         const HierarchyConfig& cfg, const Pose& pose);

struct BenchmarkConfig {
  HierarchyConfig hierarchy;
  double threshold_m = 20.0;
  std::vector<double> acc_thresholds{0.9, 0.8, 0.7};
  bool run_bruteforce = true;
  double yaw_offset = 0.0;  ///< added to every query yaw
};

struct BenchmarkTrial {
  std::string method;
  std::size_t query_id = 0;
  LocalizationResult result;
  double time_s = 0.0;
};

struct BenchmarkRow {
  std::string method;
  double acc_threshold = 0.0;
  double success_rate = 0.0;
  double mean_time_s = 0.0;
  double mean_evals = 0.0;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;
  std::vector<BenchmarkTrial> trials;
};

/**
 * Localizes every query pose with the hierarchical search (and optionally
 * brute force at the finest altitude).  A trial counts as a success at
 * acceptance level t when it lands within threshold_m and its best
 * similarity is at least t.
 */
BenchmarkReport run_benchmark(const OverheadMap& map, const std::vector<Pose>& query_poses, const PlaceModel& model,
                              const BenchmarkConfig& cfg);
BenchmarkReport run_benchmark(const OverheadMap& map, const QuerySet& qs, const PlaceModel& model,
                              const BenchmarkConfig& cfg);

/// Seeded ground poses at least `margin` metres inside the map, yaw uniform on [-pi, pi).
std::vector<Pose> random_poses(const OverheadMap& map, std::size_t count, double margin, std::uint64_t seed);

void write_report_csv(std::ostream& out, const BenchmarkReport& report);
void write_report_json(std::ostream& out, const BenchmarkReport& report);

}  // namespace sphereloc
