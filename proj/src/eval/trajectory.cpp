#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sphereloc/eval.hpp"
#include "sphereloc/orientation.hpp"

namespace sphereloc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

double parse_field(const std::string& text, const char* field, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw FormatError("trajectory line " + std::to_string(line) + ": bad " + field, field);
  }
}

}  // namespace

std::vector<TrajectoryRow> read_trajectory(std::istream& in) {
  static const char* fields[] = {"timestamp", "x", "y", "altitude", "yaw"};
  std::string line;
  if (!std::getline(in, line)) throw FormatError("trajectory: missing header", "header");
  {
    std::istringstream ss(line);
    std::string name;
    for (const char* f : fields)
      if (!std::getline(ss, name, ',') || trim(name) != f)
        throw FormatError(std::string("trajectory: header must be timestamp,x,y,altitude,yaw"), "header");
  }
  std::vector<TrajectoryRow> rows;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    double v[5];
    for (int i = 0; i < 5; ++i) {
      if (!std::getline(ss, cell, ',')) throw FormatError("trajectory line " + std::to_string(number) + ": missing " + fields[i], fields[i]);
      v[i] = parse_field(trim(cell), fields[i], number);
    }
    if (std::getline(ss, cell, ',')) throw FormatError("trajectory line " + std::to_string(number) + ": extra column", "row");
    if (!rows.empty() && !(v[0] > rows.back().t))
      throw FormatError("trajectory line " + std::to_string(number) + ": timestamps must increase", "timestamp");
    if (!(v[3] > 0.0)) throw FormatError("trajectory line " + std::to_string(number) + ": altitude must be > 0", "altitude");
    rows.push_back({v[0], v[1], v[2], v[3], v[4]});
  }
  if (rows.empty()) throw FormatError("trajectory: no rows", "row");
  return rows;
}

std::vector<TrajectoryRow> read_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open trajectory " + path.string());
  return read_trajectory(in);
}

std::vector<TrajectoryRow> interpolate_trajectory(const std::vector<TrajectoryRow>& rows, double rate_hz) {
  if (!(rate_hz > 0.0)) throw InvalidInput("interpolate_trajectory: rate must be > 0");
  if (rows.empty()) throw InvalidInput("interpolate_trajectory: no rows");
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!(rows[i].t > rows[i - 1].t)) throw FormatError("trajectory: timestamps must increase", "timestamp");

  const double t0 = rows.front().t;
  const double span = rows.back().t - t0;
  const auto steps = static_cast<std::size_t>(std::floor(span * rate_hz + 1e-9));
  std::vector<TrajectoryRow> out;
  out.reserve(steps + 1);
  std::size_t seg = 0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = t0 + double(k) / rate_hz;
    while (seg + 2 < rows.size() && rows[seg + 1].t <= t) ++seg;
    const TrajectoryRow& a = rows[seg];
    const TrajectoryRow& b = rows.size() > 1 ? rows[seg + 1] : rows[seg];
    const double u = b.t > a.t ? std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0) : 0.0;
    TrajectoryRow r;
    r.t = t;
    r.x = a.x + u * (b.x - a.x);
    r.y = a.y + u * (b.y - a.y);
    r.altitude = a.altitude + u * (b.altitude - a.altitude);
    r.yaw = wrap_angle(a.yaw + u * wrap_angle(b.yaw - a.yaw));
    out.push_back(r);
  }
  return out;
}

QuerySet ingest_trajectory(const std::filesystem::path& path, const OverheadMap& map, const PlaceModel& model,
                           double rate_hz, double threshold_m) {
  QuerySet qs;
  qs.threshold_m = threshold_m;
  for (const auto& r : interpolate_trajectory(read_trajectory(path), rate_hz)) {
    if (!map.contains(r.x, r.y))
      throw OutOfBounds("trajectory pose at t=" + std::to_string(r.t) + " lies outside the map");
    const Pose pose{r.x, r.y, r.altitude, r.yaw, 0.0};
    qs.queries.push_back({render_view(map, pose, model.render_spec()).image, pose, {}});
  }
  return qs;
}

}  // namespace sphereloc
