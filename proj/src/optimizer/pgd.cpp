#include "mlai/optimizer/pgd.hpp"

#include <algorithm>
#include <cmath>

namespace mlai {

void validate_optimizer_config(const OptimizerConfig& cfg) {
  if (!(cfg.eps > 0.0 && cfg.eps <= 1.0)) throw std::invalid_argument("eps must lie in (0,1]");
  const double a = cfg.alpha();
  if (!(a > 0.0 && a <= cfg.eps)) throw std::invalid_argument("step size must lie in (0, eps]");
  if (cfg.iterations == 0) throw std::invalid_argument("iterations must be >= 1");
}

std::size_t argmin_loss(const std::vector<Candidate>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("empty trajectory");
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (candidates[i].loss < candidates[best].loss) best = i;
  }
  return best;
}

Trajectory run_pgd(const TargetModel& model, const Image& init, std::span<const Instruction> batch,
                   const TargetCorpus& corpus, const OptimizerConfig& cfg) {
  validate_optimizer_config(cfg);
  const double eps = cfg.eps;
  const double alpha = cfg.alpha();

  Trajectory traj{init, cfg, {}, 0};
  traj.candidates.reserve(cfg.iterations);
  auto finite = [](const LossAndGrad& lg) {
    return std::isfinite(lg.loss) &&
           std::all_of(lg.grad.values.begin(), lg.grad.values.end(),
                       [](double v) { return std::isfinite(v); });
  };

  LossAndGrad lg = model.loss_and_grad(init, batch, corpus);
  if (!finite(lg)) throw AbortedRun("non-finite loss at the initial image", traj);

  const auto x0 = init.data();
  std::vector<double> x(x0.begin(), x0.end());
  for (std::size_t t = 0; t < cfg.iterations; ++t) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double g = lg.grad.values[i];
      const double s = g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
      const double v = std::clamp(x[i] - alpha * s, x0[i] - eps, x0[i] + eps);
      x[i] = std::clamp(v, 0.0, 1.0);
    }
    Image img(init.shape(), x);
    lg = model.loss_and_grad(img, batch, corpus);
    if (!finite(lg)) {
      if (!traj.candidates.empty()) traj.min_index = argmin_loss(traj.candidates);
      throw AbortedRun("non-finite loss at iteration " + std::to_string(t), std::move(traj));
    }
    traj.candidates.push_back({t, lg.loss, std::move(img)});
  }
  traj.min_index = argmin_loss(traj.candidates);
  return traj;
}

const Candidate& best_candidate(const Trajectory& traj) {
  if (traj.candidates.empty()) throw std::invalid_argument("empty trajectory");
  return traj.candidates.at(traj.min_index);
}

}  // namespace mlai
