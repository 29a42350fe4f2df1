#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "sphereloc/eval.hpp"
#include "sphereloc/orientation.hpp"

namespace sphereloc {

void QuerySet::validate() const {
  if (queries.empty()) throw InvalidInput("QuerySet: no queries");
  if (references.empty()) throw InvalidInput("QuerySet: no references");
  if (!(threshold_m > 0.0)) throw InvalidInput("QuerySet: threshold_m must be > 0");
}

void describe_queries(QuerySet& qs, const DescriptorExtractor& extractor) {
  for (auto& q : qs.queries) q.descriptor = extractor.extract(q.view);
}

std::vector<Reference> lattice_references(const OverheadMap& map, const PlaceModel& model, double altitude,
                                          double r_olp) {
  const std::size_t n = lattice_count(map.extent_x(), map.extent_y(), altitude, r_olp);
  std::vector<Reference> refs;
  for (const auto& p : uniform_lattice(map, n))
    refs.push_back({model.describe(map, p.x(), p.y(), altitude), Pose{p.x(), p.y(), altitude, 0.0, 0.0}});
  return refs;
}

namespace {

double ground_distance(const Pose& a, const Pose& b) { return std::hypot(a.x - b.x, a.y - b.y); }

void check_described(const QuerySet& qs) {
  qs.validate();
  for (const auto& q : qs.queries)
    if (q.descriptor.dim() == 0) throw InvalidInput("QuerySet: query descriptors missing; call describe_queries");
}

std::vector<double> similarities(const Query& q, const std::vector<Reference>& refs) {
  std::vector<double> s(refs.size());
  for (std::size_t r = 0; r < refs.size(); ++r) s[r] = similarity(q.descriptor, refs[r].descriptor);
  return s;
}

}  // namespace

double recall_at_n(const QuerySet& qs, int n) {
  if (n < 1) throw InvalidInput("recall_at_n: n must be >= 1");
  check_described(qs);
  std::size_t hits = 0;
  for (const auto& q : qs.queries) {
    const std::vector<double> s = similarities(q, qs.references);
    std::vector<std::size_t> order(s.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t k = std::min<std::size_t>(n, order.size());
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](std::size_t a, std::size_t b) { return s[a] > s[b] || (s[a] == s[b] && a < b); });
    for (std::size_t i = 0; i < k; ++i)
      if (ground_distance(q.pose, qs.references[order[i]].pose) <= qs.threshold_m) {
        ++hits;
        break;
      }
  }
  return double(hits) / double(qs.queries.size());
}

std::vector<Retrieval> retrieve_top1(const QuerySet& qs) {
  check_described(qs);
  std::vector<Retrieval> out;
  for (std::size_t i = 0; i < qs.queries.size(); ++i) {
    const Query& q = qs.queries[i];
    const std::vector<double> s = similarities(q, qs.references);
    const auto best = static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
    const Pose& ref = qs.references[best].pose;
    out.push_back({i, best, s[best], ground_distance(q.pose, ref), std::abs(wrap_angle(q.pose.yaw - ref.yaw))});
  }
  return out;
}

void write_retrievals_csv(std::ostream& out, const std::vector<Retrieval>& rows) {
  out << "query_id,best_match_id,similarity,dist_m,yaw_err_rad\n";
  out << std::setprecision(17);
  for (const auto& r : rows)
    out << r.query_id << ',' << r.best_match_id << ',' << r.similarity << ',' << r.dist_m << ',' << r.yaw_err_rad
        << '\n';
}

std::vector<Retrieval> read_retrievals_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "query_id,best_match_id,similarity,dist_m,yaw_err_rad")
    throw FormatError("retrieval csv: unexpected header", "header");
  std::vector<Retrieval> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    Retrieval r;
    if (!(ss >> r.query_id >> r.best_match_id >> r.similarity >> r.dist_m >> r.yaw_err_rad))
      throw FormatError("retrieval csv: malformed row", "row");
    rows.push_back(r);
  }
  return rows;
}

std::vector<RocPoint> roc_curve(const std::vector<Retrieval>& top1, double threshold_m,
                                const std::vector<double>& thresholds) {
  if (!std::is_sorted(thresholds.begin(), thresholds.end()))
    throw InvalidInput("roc_curve: thresholds must be sorted");
  std::size_t positives = 0;
  for (const auto& r : top1) positives += r.dist_m <= threshold_m;
  const std::size_t negatives = top1.size() - positives;
  std::vector<RocPoint> curve;
  for (double t : thresholds) {
    std::size_t tp = 0, fp = 0;
    for (const auto& r : top1)
      if (r.similarity >= t) (r.dist_m <= threshold_m ? tp : fp)++;
    curve.push_back({t, negatives ? double(fp) / double(negatives) : 0.0,
                     positives ? double(tp) / double(positives) : 0.0});
  }
  return curve;
}

std::vector<RocPoint> roc_curve(const QuerySet& qs, const std::vector<double>& thresholds) {
  return roc_curve(retrieve_top1(qs), qs.threshold_m, thresholds);
}

double roc_auc(const std::vector<RocPoint>& curve) {
  std::vector<std::pair<double, double>> pts{{0.0, 0.0}, {1.0, 1.0}};
  for (const auto& p : curve) pts.emplace_back(p.fpr, p.tpr);
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    area += (pts[i].first - pts[i - 1].first) * 0.5 * (pts[i].second + pts[i - 1].second);
  return area;
}

}  // namespace sphereloc
