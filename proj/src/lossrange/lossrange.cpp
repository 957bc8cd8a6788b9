#include "mlai/lossrange/lossrange.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mlai {

void validate_range_config(const RangeConfig& cfg) {
  if (!(cfg.K > 0.0) || !std::isfinite(cfg.K)) throw std::invalid_argument("K must be > 0");
  if (cfg.rho == 0) throw std::invalid_argument("rho must be >= 1");
  if (cfg.window == 0) throw std::invalid_argument("slope window must be >= 1");
}

std::vector<std::size_t> CandidateSet::iterations() const {
  std::vector<std::size_t> out;
  out.reserve(members.size());
  for (const auto& c : members) out.push_back(c.iteration);
  return out;
}

namespace {

// Points (offset from the minimum, loss) for one side, minimum included.
double side_slope(std::span<const double> losses, std::size_t lo, std::size_t hi,
                  std::size_t min_index, double K) {
  const std::size_t n = hi - lo + 1;
  if (n < 2) return K;
  long long sx = 0;
  for (std::size_t i = lo; i <= hi; ++i) sx += static_cast<long long>(i) - static_cast<long long>(min_index);
  const double y0 = losses[lo];
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) {
    const long long x = static_cast<long long>(i) - static_cast<long long>(min_index);
    const long long d = static_cast<long long>(n) * x - sx;
    num += static_cast<double>(d) * (losses[i] - y0);
    den += static_cast<double>(d * x);
  }
  return std::abs(num / den);
}

}  // namespace

SlopeFit fit_side_slopes(std::span<const double> losses, std::size_t min_index,
                         std::size_t window, double K) {
  if (losses.size() < 2) throw std::invalid_argument("slope fit needs at least two points");
  if (min_index >= losses.size()) throw std::invalid_argument("minimum index outside trajectory");
  if (window == 0) throw std::invalid_argument("slope window must be >= 1");
  SlopeFit fit;
  fit.window = window;
  fit.points_used_left = std::min(window, min_index);
  fit.points_used_right = std::min(window, losses.size() - 1 - min_index);
  fit.available_left = min_index;
  fit.available_right = losses.size() - 1 - min_index;
  fit.k_l = side_slope(losses, min_index - fit.points_used_left, min_index, min_index, K);
  fit.k_r = side_slope(losses, min_index, min_index + fit.points_used_right, min_index, K);
  return fit;
}

SlopeFit fit_side_slopes(const Trajectory& traj, std::size_t window, double K) {
  std::vector<double> losses;
  losses.reserve(traj.size());
  for (const auto& c : traj.candidates) losses.push_back(c.loss);
  return fit_side_slopes(losses, traj.min_index, window, K);
}

LossRange compute_range(const SlopeFit& fit, const RangeConfig& cfg) {
  validate_range_config(cfg);
  auto v_of = [&](double k) -> std::size_t {
    if (!(k > 0.0)) return 1;
    const double v = std::ceil(k / cfg.K);
    if (v >= 1e12) return static_cast<std::size_t>(1e12);
    return std::max<std::size_t>(1, static_cast<std::size_t>(v));
  };
  auto n_of = [&](std::size_t v, std::size_t available) {
    const std::size_t limit = available / cfg.rho + 1;
    return v >= limit ? available : std::min(v * cfg.rho, available);
  };
  LossRange r;
  r.v_left = v_of(fit.k_l);
  r.v_right = v_of(fit.k_r);
  r.n_left = n_of(r.v_left, fit.available_left);
  r.n_right = n_of(r.v_right, fit.available_right);
  return r;
}

std::vector<std::size_t> select_iterations(std::size_t length, std::size_t min_index,
                                           const LossRange& range) {
  if (min_index >= length) throw std::invalid_argument("minimum index outside trajectory");
  const std::size_t lo = min_index - std::min(range.n_left, min_index);
  const std::size_t hi = min_index + std::min(range.n_right, length - 1 - min_index);
  std::vector<std::size_t> out;
  for (std::size_t i = lo; i <= hi; ++i) out.push_back(i);
  return out;
}

CandidateSet select_candidates(const Trajectory& traj, const LossRange& range) {
  CandidateSet set;
  set.min_iteration = best_candidate(traj).iteration;
  for (std::size_t i : select_iterations(traj.size(), traj.min_index, range)) {
    set.members.push_back(traj.candidates[i]);
  }
  return set;
}

RangeAnalysis analyze_trajectory(const Trajectory& traj, const RangeConfig& cfg) {
  validate_range_config(cfg);
  RangeAnalysis a;
  if (traj.size() < 2) {
    // A single candidate has no sides to fit.
    a.fit.available_left = a.fit.available_right = 0;
    a.fit.k_l = a.fit.k_r = cfg.K;
    a.fit.window = cfg.window;
  } else {
    a.fit = fit_side_slopes(traj, cfg.window, cfg.K);
  }
  a.range = compute_range(a.fit, cfg);
  a.set = select_candidates(traj, a.range);
  return a;
}

CandidateSet nearest_candidates(const Trajectory& traj, std::size_t count) {
  const auto& best = best_candidate(traj);
  std::vector<std::size_t> order(traj.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto m = static_cast<long long>(traj.min_index);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto da = std::llabs(static_cast<long long>(a) - m);
    const auto db = std::llabs(static_cast<long long>(b) - m);
    return da != db ? da < db : a < b;
  });
  order.resize(std::min(count, order.size()));
  std::sort(order.begin(), order.end());
  CandidateSet set;
  set.min_iteration = best.iteration;
  for (std::size_t i : order) set.members.push_back(traj.candidates[i]);
  return set;
}

}  // namespace mlai
