#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "mlai/optimizer/pgd.hpp"

namespace mlai {

inline constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

struct SlopeFit {
  double k_l = 0.0;
  double k_r = 0.0;
  std::size_t window = 20;
  /// Trajectory points on each side of the minimum that entered the fit
  /// (the minimum itself is not counted).
  std::size_t points_used_left = 0;
  std::size_t points_used_right = 0;
  /// Candidates that exist on each side; compute_range clamps to these.
  std::size_t available_left = kUnbounded;
  std::size_t available_right = kUnbounded;
};

struct RangeConfig {
  double K = 1.0;
  std::size_t rho = 6;
  std::size_t window = 20;
};

void validate_range_config(const RangeConfig& cfg);

struct LossRange {
  std::size_t n_left = 0;
  std::size_t n_right = 0;
  std::size_t v_left = 0;
  std::size_t v_right = 0;
  bool operator==(const LossRange&) const = default;
};

struct CandidateSet {
  std::vector<Candidate> members;
  std::size_t min_iteration = 0;

  std::vector<std::size_t> iterations() const;
  std::size_t size() const { return members.size(); }
};

/// Absolute least-squares slope of loss against iteration through the points
/// of one side plus the minimum. With integer abscissae the fit is
/// sum d_i (y_i - y_0) / sum d_i x_i, d_i = n x_i - sum x, which is exact for
/// lines and constants. Sides with fewer than two points get K.
SlopeFit fit_side_slopes(std::span<const double> losses, std::size_t min_index,
                         std::size_t window, double K);
SlopeFit fit_side_slopes(const Trajectory& traj, std::size_t window = 20, double K = 1.0);

/// v = max(1, ceil(k / K)), n = v * rho, n clamped to the available side.
LossRange compute_range(const SlopeFit& fit, const RangeConfig& cfg);

/// Iterations [min - n_left, min + n_right], clamped to the trajectory.
CandidateSet select_candidates(const Trajectory& traj, const LossRange& range);
std::vector<std::size_t> select_iterations(std::size_t length, std::size_t min_index,
                                           const LossRange& range);

struct RangeAnalysis {
  SlopeFit fit;
  LossRange range;
  CandidateSet set;
};

RangeAnalysis analyze_trajectory(const Trajectory& traj, const RangeConfig& cfg);

/// The k nearest candidates to the minimum in iteration distance, the earlier
/// one first on equal distance.
CandidateSet nearest_candidates(const Trajectory& traj, std::size_t count);

}  // namespace mlai
