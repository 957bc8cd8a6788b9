#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mlai/models/target_model.hpp"
#include "mlai/tensor/rng.hpp"

namespace mlai {

inline constexpr double kDefaultEps = 32.0 / 255.0;

struct OptimizerConfig {
  double eps = kDefaultEps;
  /// Defaults to eps / 10 when unset.
  std::optional<double> step_size;
  std::size_t iterations = 500;
  Seed seed{0};

  double alpha() const { return step_size.value_or(eps / 10.0); }
};

void validate_optimizer_config(const OptimizerConfig& cfg);

struct Candidate {
  std::size_t iteration = 0;
  double loss = 0.0;
  Image image;
};

struct Trajectory {
  Image initial_image;
  OptimizerConfig config;
  std::vector<Candidate> candidates;
  std::size_t min_index = 0;

  std::size_t size() const { return candidates.size(); }
};

/// Raised when the loss or gradient turns non-finite; carries every candidate
/// recorded before the failure.
class AbortedRun : public std::runtime_error {
 public:
  AbortedRun(const std::string& what, Trajectory partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

/// Index of the smallest loss, earliest on ties.
std::size_t argmin_loss(const std::vector<Candidate>& candidates);

/// Sign-gradient descent projected onto the eps-ball around `init` and onto
/// [0,1]; one candidate per step, iterations numbered from 0.
Trajectory run_pgd(const TargetModel& model, const Image& init, std::span<const Instruction> batch,
                   const TargetCorpus& corpus, const OptimizerConfig& cfg);

const Candidate& best_candidate(const Trajectory& traj);

}  // namespace mlai
