#include <cmath>
#include <numbers>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sphereloc/eval.hpp"
#include "sphereloc/localizer.hpp"
#include "sphereloc/orientation.hpp"

using namespace sphereloc;
using nlohmann::json;

namespace {

constexpr int kUsageError = 2;
constexpr int kInternalError = 3;

struct Options {
  std::string map_path, sidecar_path, out_path, trajectory_path, trace_path, query_path, reference_path;
  std::string pose_text;
  std::string backend;  ///< empty: the subcommand's default
  std::string format = "json";
  std::string method = "hier";
  std::string mode = "spherical";
  std::string weights_path;
  std::string retrievals_path;
  int band_limit = 0;  ///< 0: the subcommand's default
  double alpha = 3.0;
  int levels = 3;
  double r_olp = 0.5;
  double cull = 0.2;
  double base_altitude = 40.0;
  double threshold = 20.0;
  double yaw_offset_deg = 0.0;
  double rate = 1.0;
  std::uint64_t seed = 0;
  bool sky_crop = false;
  bool no_bruteforce = false;
  std::size_t queries = 20;
  // synth
  std::vector<double> extent{1000.0, 500.0};
  double gsd = 1.0;
  int landmarks = 10;
  int octaves = 4;
};

Pose parse_pose(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      v.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw InvalidInput("--pose: cannot parse '" + cell + "'");
    }
  }
  if (v.size() != 4) throw InvalidInput("--pose expects x,y,alt,yaw");
  return Pose{v[0], v[1], v[2], v[3], 0.0};
}

DescriptorConfig descriptor_config(const Options& o, DescriptorConfig cfg = {}) {
  if (!o.backend.empty()) cfg.backend = parse_backend(o.backend);
  cfg.weight_seed = o.seed;
  if (!o.weights_path.empty()) cfg.weight_file = o.weights_path;
  return cfg;
}

HierarchyConfig hierarchy_config(const Options& o) {
  HierarchyConfig cfg = synthetic_preset().hierarchy;
  cfg.alpha = o.alpha;
  cfg.l_max = o.levels;
  cfg.r_olp = o.r_olp;
  cfg.cull_fraction = o.cull;
  cfg.base_altitude = o.base_altitude;
  cfg.seed = o.seed;
  cfg.validate();
  return cfg;
}

OverheadMap open_map(const Options& o) {
  if (o.map_path.empty()) throw InvalidInput("--map is required");
  const std::filesystem::path raster(o.map_path);
  std::filesystem::path sidecar = o.sidecar_path;
  if (sidecar.empty()) sidecar = std::filesystem::path(raster).replace_extension(".json");
  return load_map(raster, sidecar);
}

// Writes to --out, or stdout when no path is given.
void emit(const Options& o, const std::string& text) {
  if (o.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(o.out_path);
  if (!out) throw InvalidInput("cannot write " + o.out_path);
  out << text;
}

PlaceModel place_model(const Options& o) {
  LocalizationPreset preset = synthetic_preset();
  if (o.band_limit > 0) preset.render.band_limit = o.band_limit;
  preset.descriptor = descriptor_config(o, preset.descriptor);
  return preset.model();
}

json result_json(const LocalizationResult& r) {
  json j = {{"estimate", {r.estimate.x(), r.estimate.y()}},
            {"yaw_deg", r.yaw * 180.0 / std::numbers::pi},
            {"best_similarity", r.best_similarity},
            {"n_descriptor_evals", r.n_descriptor_evals},
            {"diverged", r.diverged},
            {"success", r.success.value_or(false)}};
  if (r.error_m) j["error_m"] = *r.error_m;
  return j;
}

void cmd_synth(const Options& o) {
  if (o.out_path.empty()) throw InvalidInput("--out is required");
  if (o.extent.size() != 2) throw InvalidInput("--extent expects W,H");
  SyntheticWorldSpec spec;
  spec.extent_m = {o.extent[0], o.extent[1]};
  spec.gsd = o.gsd;
  spec.landmark_count = o.landmarks;
  spec.texture_octaves = o.octaves;
  spec.seed = o.seed;
  const OverheadMap map = generate_world(spec);
  std::filesystem::path sidecar = o.sidecar_path;
  if (sidecar.empty()) sidecar = std::filesystem::path(o.out_path).replace_extension(".json");
  save_map(map, o.out_path, sidecar);
}

void cmd_render(const Options& o) {
  if (o.out_path.empty()) throw InvalidInput("--out is required");
  const OverheadMap map = open_map(o);
  RenderSpec spec;
  if (o.mode == "spherical")
    spec.mode = RenderMode::spherical;
  else if (o.mode == "nadir")
    spec.mode = RenderMode::pinhole_nadir;
  else
    throw InvalidInput("--mode must be spherical or nadir");
  spec.band_limit = o.band_limit > 0 ? o.band_limit : 64;
  spec.sky_crop = o.sky_crop;
  const Pose pose = parse_pose(o.pose_text);
  const RenderResult r = render_view(map, pose, spec);
  write_ppm(o.out_path, to_raster(r.image));
  std::cout << json{{"truncated", r.truncated}, {"band_limit", r.image.band_limit()}}.dump() << '\n';
}

void cmd_orient(const Options& o) {
  if (o.query_path.empty() || o.reference_path.empty()) throw InvalidInput("--query and --reference are required");
  const SphericalImaged query = from_raster(read_ppm(o.query_path));
  const SphericalImaged reference = from_raster(read_ppm(o.reference_path));
  const DescriptorExtractor features(descriptor_config(o), query.band_limit(), query.channels());
  const YawEstimate est = estimate_yaw(query, reference, features);
  emit(o, json{{"yaw_deg", est.yaw * 180.0 / std::numbers::pi}, {"confidence", est.confidence}}.dump() + "\n");
}

void cmd_localize(const Options& o) {
  const OverheadMap map = open_map(o);
  HierarchyConfig cfg = hierarchy_config(o);
  const PlaceModel model = place_model(o);

  std::vector<Pose> poses;
  if (!o.trajectory_path.empty()) {
    for (const auto& r : interpolate_trajectory(read_trajectory(o.trajectory_path), o.rate))
      poses.push_back(Pose{r.x, r.y, r.altitude, r.yaw, 0.0});
  } else {
    poses.push_back(parse_pose(o.pose_text));
  }

  json results = json::array();
  std::ofstream trace;
  if (!o.trace_path.empty()) {
    trace.open(o.trace_path);
    if (!trace) throw InvalidInput("cannot write " + o.trace_path);
  }
  for (const Pose& pose : poses) {
    if (!(pose.altitude > 0.0)) throw InvalidInput("query altitude must be > 0");
    HierarchyConfig c = cfg;
    c.base_altitude = pose.altitude;
    c.validate();
    const GroundTruth truth{pose.x, pose.y, o.threshold};
    const std::vector<SphericalImaged> views = level_views(map, model, c, pose);
    LocalizationResult r;
    if (o.method == "hier")
      r = localize_hierarchical(map, views, model, c, truth);
    else if (o.method == "brute")
      r = localize_bruteforce(map, views.back(), c.altitude(c.l_max - 1), model, c, truth);
    else
      throw InvalidInput("--method must be hier or brute");
    if (trace.is_open()) write_trace_jsonl(trace, r.trace);
    json j = result_json(r);
    j["truth"] = {pose.x, pose.y};
    results.push_back(j);
  }
  emit(o, (results.size() == 1 ? results[0] : results).dump(2) + "\n");
}

void cmd_benchmark(const Options& o) {
  const OverheadMap map = open_map(o);
  BenchmarkConfig cfg;
  cfg.hierarchy = hierarchy_config(o);
  cfg.threshold_m = o.threshold;
  cfg.run_bruteforce = !o.no_bruteforce;
  cfg.yaw_offset = o.yaw_offset_deg * std::numbers::pi / 180.0;
  const PlaceModel model = place_model(o);

  std::vector<Pose> poses;
  if (!o.trajectory_path.empty()) {
    for (const auto& r : interpolate_trajectory(read_trajectory(o.trajectory_path), o.rate))
      poses.push_back(Pose{r.x, r.y, r.altitude, r.yaw, 0.0});
  } else {
    poses = random_poses(map, o.queries, cfg.hierarchy.base_altitude, o.seed);
  }
  const BenchmarkReport report = run_benchmark(map, poses, model, cfg);

  std::ostringstream text;
  if (o.format == "csv")
    write_report_csv(text, report);
  else if (o.format == "json")
    write_report_json(text, report);
  else
    throw InvalidInput("--format must be csv or json");
  emit(o, text.str());

  if (!o.retrievals_path.empty()) {
    const double altitude = cfg.hierarchy.altitude(cfg.hierarchy.l_max - 1);
    QuerySet qs;
    qs.threshold_m = o.threshold;
    for (const Pose& p : poses) {
      Pose q = p;
      q.altitude = altitude;
      q.yaw += cfg.yaw_offset;
      qs.queries.push_back({model.view(map, q.x, q.y, altitude, q.yaw), q, {}});
    }
    qs.references = lattice_references(map, model, altitude, cfg.hierarchy.r_olp);
    describe_queries(qs, model.extractor());
    std::ofstream out(o.retrievals_path);
    if (!out) throw InvalidInput("cannot write " + o.retrievals_path);
    write_retrievals_csv(out, retrieve_top1(qs));
  }
}

void add_map_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--map", o.map_path, "P6 raster")->required();
  cmd->add_option("--sidecar", o.sidecar_path, "georeferencing JSON (default: raster path with .json)");
}

void add_model_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--band-limit", o.band_limit, "spherical band limit B (default 32)")->check(CLI::Range(2, 512));
  cmd->add_option("--backend", o.backend, "power-spectrum | sconv-vlad (default sconv-vlad)");
  cmd->add_option("--weights", o.weights_path, "sconv-vlad weight file");
  cmd->add_option("--seed", o.seed, "seed for weights and the particle filter");
}

void add_hierarchy_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--alpha", o.alpha, "coarsest altitude multiplier");
  cmd->add_option("--levels", o.levels, "number of altitude levels");
  cmd->add_option("--r-olp", o.r_olp, "footprint overlap ratio");
  cmd->add_option("--cull", o.cull, "fraction culled before resampling");
  cmd->add_option("--threshold", o.threshold, "success radius in metres");
  cmd->add_option("--trajectory", o.trajectory_path, "CSV timestamp,x,y,altitude,yaw");
  cmd->add_option("--rate", o.rate, "trajectory interpolation rate in Hz");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spherical place recognition and hierarchical aerial localization"};
  app.require_subcommand(1);
  Options o;

  auto* synth = app.add_subcommand("synth", "generate a seeded synthetic world");
  synth->add_option("--out", o.out_path, "output raster (.ppm)")->required();
  synth->add_option("--sidecar", o.sidecar_path, "output sidecar JSON");
  synth->add_option("--extent", o.extent, "W,H in metres")->delimiter(',')->expected(2);
  synth->add_option("--gsd", o.gsd, "metres per pixel");
  synth->add_option("--landmarks", o.landmarks, "landmark polygon count");
  synth->add_option("--octaves", o.octaves, "value-noise octaves");
  synth->add_option("--seed", o.seed, "world seed");

  auto* render = app.add_subcommand("render", "render a view from a pose");
  add_map_flags(render, o);
  render->add_option("--pose", o.pose_text, "x,y,alt,yaw")->required();
  render->add_option("--band-limit", o.band_limit, "output grid is 2B x 2B (default 64)")->check(CLI::Range(2, 512));
  render->add_option("--mode", o.mode, "spherical | nadir");
  render->add_flag("--sky-crop", o.sky_crop, "fill directions above the view cone");
  render->add_option("--out", o.out_path, "output image (.ppm)")->required();

  auto* orient = app.add_subcommand("orient", "relative yaw between two rendered views");
  orient->add_option("--query", o.query_path, "query view (.ppm)")->required();
  orient->add_option("--reference", o.reference_path, "reference view (.ppm)")->required();
  orient->add_option("--backend", o.backend, "power-spectrum (raw intensities) | sconv-vlad (first-layer features)");
  orient->add_option("--weights", o.weights_path, "sconv-vlad weight file");
  orient->add_option("--seed", o.seed, "weight seed");
  orient->add_option("--out", o.out_path, "output JSON");

  auto* localize = app.add_subcommand("localize", "global localization of one pose or a trajectory");
  add_map_flags(localize, o);
  add_model_flags(localize, o);
  add_hierarchy_flags(localize, o);
  localize->add_option("--pose", o.pose_text, "ground-truth query pose x,y,alt,yaw");
  localize->add_option("--method", o.method, "hier | brute");
  localize->add_option("--trace", o.trace_path, "particle trace (JSON lines)");
  localize->add_option("--out", o.out_path, "output JSON");

  auto* benchmark = app.add_subcommand("benchmark", "hierarchical vs brute-force report");
  add_map_flags(benchmark, o);
  add_model_flags(benchmark, o);
  add_hierarchy_flags(benchmark, o);
  benchmark->add_option("--queries", o.queries, "random query count when no trajectory is given");
  benchmark->add_option("--base-altitude", o.base_altitude, "finest altitude H1 in metres");
  benchmark->add_option("--yaw-offset", o.yaw_offset_deg, "degrees added to every query yaw");
  benchmark->add_flag("--no-bruteforce", o.no_bruteforce, "skip the brute-force baseline");
  benchmark->add_option("--format", o.format, "csv | json (default json)");
  benchmark->add_option("--retrievals", o.retrievals_path, "per-query retrieval CSV");
  benchmark->add_option("--out", o.out_path, "report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (localize->parsed() && o.pose_text.empty() && o.trajectory_path.empty())
      throw InvalidInput("localize needs --pose or --trajectory");
    if (synth->parsed()) cmd_synth(o);
    if (render->parsed()) cmd_render(o);
    if (orient->parsed()) cmd_orient(o);
    if (localize->parsed()) cmd_localize(o);
    if (benchmark->parsed()) cmd_benchmark(o);
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInternalError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
  return 0;
}
