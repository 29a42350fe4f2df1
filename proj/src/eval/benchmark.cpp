#include <chrono>
#include <cmath>
#include <numbers>
#include <iomanip>
#include <random>

#include <json.hpp>

#include "sphereloc/eval.hpp"

namespace sphereloc {

LocalizationPreset synthetic_preset() {
  LocalizationPreset p;
  p.render.mode = RenderMode::spherical;
  p.render.band_limit = 32;
  p.render.sky_crop = true;
  p.descriptor.backend = DescriptorBackend::sconv_vlad;
  p.descriptor.num_layers = 1;
  p.hierarchy.similarity_exponent = 1e4;
  p.hierarchy.min_match_similarity = 0.9995;
  return p;
}

std::vector<SphericalImaged> level_views(const OverheadMap& map, const PlaceModel& model,
                                         const HierarchyConfig& cfg, const Pose& pose) {
  std::vector<SphericalImaged> views;
  for (int level = 0; level < cfg.l_max; ++level)
    views.push_back(model.view(map, pose.x, pose.y, cfg.altitude(level), pose.yaw));
  return views;
}

std::vector<Pose> random_poses(const OverheadMap& map, std::size_t count, double margin, std::uint64_t seed) {
  const double x0 = map.origin_x() + margin, x1 = map.origin_x() + (map.width() - 1) * map.gsd() - margin;
  const double y0 = map.origin_y() + margin, y1 = map.origin_y() + (map.height() - 1) * map.gsd() - margin;
  if (!(x1 > x0 && y1 > y0)) throw InvalidInput("random_poses: margin leaves no room on the map");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1), uyaw(-std::numbers::pi, std::numbers::pi);
  std::vector<Pose> poses;
  for (std::size_t i = 0; i < count; ++i) {
    const double x = ux(rng), y = uy(rng);
    poses.push_back(Pose{x, y, 0.0, uyaw(rng), 0.0});
  }
  return poses;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void summarize(BenchmarkReport& report, const std::string& method, const BenchmarkConfig& cfg) {
  double time = 0.0, evals = 0.0;
  std::size_t n = 0;
  for (const auto& t : report.trials)
    if (t.method == method) {
      time += t.time_s;
      evals += double(t.result.n_descriptor_evals);
      ++n;
    }
  if (n == 0) return;
  for (double acc : cfg.acc_thresholds) {
    std::size_t ok = 0;
    for (const auto& t : report.trials)
      if (t.method == method && t.result.success.value_or(false) && t.result.best_similarity >= acc) ++ok;
    report.rows.push_back({method, acc, double(ok) / double(n), time / double(n), evals / double(n)});
  }
}

}  // namespace

BenchmarkReport run_benchmark(const OverheadMap& map, const std::vector<Pose>& query_poses, const PlaceModel& model,
                              const BenchmarkConfig& cfg) {
  cfg.hierarchy.validate();
  if (query_poses.empty()) throw InvalidInput("run_benchmark: no queries");
  if (!(cfg.threshold_m > 0.0)) throw InvalidInput("run_benchmark: threshold_m must be > 0");
  BenchmarkReport report;
  const double finest = cfg.hierarchy.altitude(cfg.hierarchy.l_max - 1);
  std::optional<ReferenceGrid> grid;
  if (cfg.run_bruteforce) grid = build_reference_grid(map, finest, model, cfg.hierarchy);
  for (std::size_t i = 0; i < query_poses.size(); ++i) {
    Pose pose = query_poses[i];
    pose.yaw += cfg.yaw_offset;
    const GroundTruth truth{pose.x, pose.y, cfg.threshold_m};
    const std::vector<SphericalImaged> views = level_views(map, model, cfg.hierarchy, pose);

    auto start = std::chrono::steady_clock::now();
    LocalizationResult hier = localize_hierarchical(map, views, model, cfg.hierarchy, truth);
    report.trials.push_back({"hierarchical", i, std::move(hier), seconds_since(start)});

    if (cfg.run_bruteforce) {
      start = std::chrono::steady_clock::now();
      LocalizationResult brute = localize_bruteforce(map, *grid, views.back(), model, cfg.hierarchy, truth);
      report.trials.push_back({"bruteforce", i, std::move(brute), seconds_since(start)});
    }
  }
  summarize(report, "hierarchical", cfg);
  summarize(report, "bruteforce", cfg);
  return report;
}

BenchmarkReport run_benchmark(const OverheadMap& map, const QuerySet& qs, const PlaceModel& model,
                              const BenchmarkConfig& cfg) {
  if (qs.queries.empty()) throw InvalidInput("run_benchmark: no queries");
  std::vector<Pose> poses;
  for (const auto& q : qs.queries) poses.push_back(q.pose);
  BenchmarkConfig c = cfg;
  c.threshold_m = qs.threshold_m;
  return run_benchmark(map, poses, model, c);
}

void write_report_csv(std::ostream& out, const BenchmarkReport& report) {
  out << "method,acc_threshold,success_rate,mean_time_s,mean_evals\n" << std::setprecision(10);
  for (const auto& r : report.rows)
    out << r.method << ',' << r.acc_threshold << ',' << r.success_rate << ',' << r.mean_time_s << ','
        << r.mean_evals << '\n';
}

void write_report_json(std::ostream& out, const BenchmarkReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows)
    rows.push_back({{"method", r.method},
                    {"acc_threshold", r.acc_threshold},
                    {"success_rate", r.success_rate},
                    {"mean_time_s", r.mean_time_s},
                    {"mean_evals", r.mean_evals}});
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : report.trials)
    trials.push_back({{"method", t.method},
                      {"query_id", t.query_id},
                      {"success", t.result.success.value_or(false)},
                      {"error_m", t.result.error_m.value_or(-1.0)},
                      {"estimate", {t.result.estimate.x(), t.result.estimate.y()}},
                      {"best_similarity", t.result.best_similarity},
                      {"evals", t.result.n_descriptor_evals},
                      {"diverged", t.result.diverged},
                      {"time_s", t.time_s}});
  out << nlohmann::json{{"rows", rows}, {"trials", trials}}.dump(2) << '\n';
}

}  // namespace sphereloc
