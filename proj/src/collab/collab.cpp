#include "mlai/collab/collab.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mlai {

AttackOutcome collaborative_attack(const TargetModel& model, const CandidateSet& set,
                                   const Instruction& instr, const Judge& j) {
  if (set.members.empty()) throw std::invalid_argument("collaborative attack on an empty set");
  AttackOutcome out;
  out.instruction_id = instr.id;
  for (const auto& c : set.members) {
    const Response r = model.respond(c.image, instr);
    const bool verdict = judge(j, r);
    out.per_image.push_back({c.iteration, verdict, r.harm_score});
    out.success = out.success || verdict;
  }
  return out;
}

CandidateSet singleton_set(const Trajectory& traj) {
  const auto& best = best_candidate(traj);
  return {{best}, best.iteration};
}

double compute_asr(const std::vector<AttackOutcome>& outcomes) {
  if (outcomes.empty()) throw std::invalid_argument("ASR of an empty outcome list");
  std::size_t s = 0;
  for (const auto& o : outcomes) s += o.success ? 1 : 0;
  return static_cast<double>(s) / static_cast<double>(outcomes.size());
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", fraction * 100.0);
  return buf;
}

void ConditionTally::add(const std::vector<AttackOutcome>& outcomes) {
  for (const auto& o : outcomes) {
    ++n;
    successes += o.success ? 1 : 0;
  }
}

std::size_t EvalReport::total_excluded() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.excluded;
  return n;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string eval_report_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "scenario,provider,runs,excluded,n,min_loss_successes,multi_loss_successes,"
         "min_loss_asr,multi_loss_asr,mean_set_size\n";
  for (const auto& r : report.rows) {
    out << to_code(r.scenario) << ',' << r.provider << ',' << r.runs << ',' << r.excluded << ','
        << r.multi_loss.n << ',' << r.min_loss.successes << ',' << r.multi_loss.successes << ','
        << format_percent(r.min_loss.asr()) << ',' << format_percent(r.multi_loss.asr()) << ','
        << fixed(r.mean_set_size, 2) << '\n';
  }
  return out.str();
}

std::string eval_report_json(const EvalReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"scenario", to_code(r.scenario)},
                    {"provider", r.provider},
                    {"runs", r.runs},
                    {"excluded", r.excluded},
                    {"n", r.multi_loss.n},
                    {"min_loss_successes", r.min_loss.successes},
                    {"multi_loss_successes", r.multi_loss.successes},
                    {"min_loss_asr", r.min_loss.asr()},
                    {"multi_loss_asr", r.multi_loss.asr()},
                    {"mean_set_size", r.mean_set_size}});
  }
  nlohmann::json j = {{"rows", rows}, {"seeds", report.seeds}};
  return j.dump(2) + "\n";
}

}  // namespace mlai
