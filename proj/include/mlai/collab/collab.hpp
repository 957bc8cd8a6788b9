#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mlai/lossrange/lossrange.hpp"
#include "mlai/models/judge.hpp"

namespace mlai {

struct ImageVerdict {
  std::size_t iteration = 0;
  bool judged = false;
  double harm_score = 0.0;
};

struct AttackOutcome {
  std::string instruction_id;
  std::vector<ImageVerdict> per_image;
  /// Any-success over per_image.
  bool success = false;
};

/// Queries the model with every member of the set; success if any response
/// is judged harmful.
AttackOutcome collaborative_attack(const TargetModel& model, const CandidateSet& set,
                                   const Instruction& instr, const Judge& j);

/// The min-loss baseline: the singleton set holding the best candidate.
CandidateSet singleton_set(const Trajectory& traj);

/// successes / N; throws on an empty list.
double compute_asr(const std::vector<AttackOutcome>& outcomes);

/// 0.7775 -> "77.75".
std::string format_percent(double fraction);

struct ConditionTally {
  std::size_t n = 0;
  std::size_t successes = 0;

  double asr() const { return n == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(n); }
  void add(const std::vector<AttackOutcome>& outcomes);
};

struct EvalRow {
  Category scenario = Category::IA;
  std::string provider;
  std::size_t runs = 0;
  std::size_t excluded = 0;
  ConditionTally min_loss;
  ConditionTally multi_loss;
  /// Mean multi-loss candidate-set size over non-excluded runs.
  double mean_set_size = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::vector<std::uint64_t> seeds;

  std::size_t total_excluded() const;
};

/// Columns: scenario,provider,runs,excluded,n,min_loss_successes,
/// multi_loss_successes,min_loss_asr,multi_loss_asr,mean_set_size.
std::string eval_report_csv(const EvalReport& report);
std::string eval_report_json(const EvalReport& report);

}  // namespace mlai
