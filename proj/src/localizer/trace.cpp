#include <json.hpp>

#include "sphereloc/localizer.hpp"

namespace sphereloc {

void write_trace_jsonl(std::ostream& out, const std::vector<TraceRecord>& trace) {
  for (const auto& rec : trace) {
    nlohmann::json particles = nlohmann::json::array();
    for (const auto& p : rec.particles) particles.push_back({p.x, p.y, p.weight});
    const nlohmann::json line = {{"level", rec.level},         {"iteration", rec.iteration},
                                 {"altitude", rec.altitude},   {"n_eff", rec.n_eff},
                                 {"eval_count", rec.eval_count}, {"particles", std::move(particles)}};
    out << line.dump() << '\n';
  }
}

}  // namespace sphereloc
