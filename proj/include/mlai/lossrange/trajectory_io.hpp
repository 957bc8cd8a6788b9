#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mlai/lossrange/lossrange.hpp"

namespace mlai {

// Trajectory JSON-lines: one {"iteration":i,"loss":x} record per candidate,
// then an optional footer
//   {"type":"range","k_l":..,"k_r":..,"K":..,"rho":..,"v_left":..,"v_right":..,
//    "n_left":..,"n_right":..,"selected_iterations":[..]}
// Losses are written in shortest round-trip form, so reading the file back
// yields the exact doubles.

struct RangeFooter {
  double k_l = 0.0;
  double k_r = 0.0;
  double K = 1.0;
  std::size_t rho = 6;
  LossRange range;
  std::vector<std::size_t> selected_iterations;
};

struct TrajectoryRecord {
  std::vector<std::size_t> iterations;
  std::vector<double> losses;
  std::optional<RangeFooter> footer;
};

RangeFooter make_footer(const RangeAnalysis& analysis, const RangeConfig& cfg);

void write_trajectory_jsonl(std::ostream& out, const Trajectory& traj,
                            const std::optional<RangeFooter>& footer);
/// Same format from bare losses (iterations 0..n-1).
void write_trajectory_jsonl(std::ostream& out, std::span<const double> losses,
                            const std::optional<RangeFooter>& footer);
void save_trajectory_jsonl(const std::filesystem::path& path, const Trajectory& traj,
                           const std::optional<RangeFooter>& footer);

/// Throws std::runtime_error naming the offending line on malformed input.
TrajectoryRecord read_trajectory_jsonl(std::istream& in);
TrajectoryRecord load_trajectory_jsonl(const std::filesystem::path& path);

/// Writes every candidate as <dir>/<stem>_iter<NNNN>.mimg; returns the paths.
std::vector<std::filesystem::path> save_candidate_images(const Trajectory& traj,
                                                         const std::filesystem::path& dir,
                                                         const std::string& stem);

}  // namespace mlai
