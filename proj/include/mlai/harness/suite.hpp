#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mlai/collab/collab.hpp"
#include "mlai/harness/cells.hpp"
#include "mlai/lossrange/trajectory_io.hpp"

namespace mlai {

/// `requested`, or the hardware concurrency when 0 (at least 1).
std::size_t resolve_workers(std::size_t requested);

/// fn(i) for i in [0, n) on a pool of `workers` threads; results are returned
/// in index order. The first exception by index is rethrown after the pool
/// drains.
template <class R, class F>
std::vector<R> parallel_map(std::size_t n, std::size_t workers, F&& fn) {
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t w = std::max<std::size_t>(1, std::min(workers, n));
  if (w == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < w; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

template <class R>
struct CellOutput {
  CellSpec spec;
  /// Empty when the run aborted.
  std::optional<R> value;
  std::string abort_reason;
};

/// Prepares and optimizes every cell, then hands the trajectory to `fn` in
/// the worker. Aborted runs come back without a value.
template <class R>
std::vector<CellOutput<R>> run_cells(
    const Lab& lab, const std::vector<CellSpec>& cells,
    const std::function<R(const PreparedCell&, const Trajectory&)>& fn) {
  return parallel_map<CellOutput<R>>(
      cells.size(), resolve_workers(lab.config().workers), [&](std::size_t i) {
        const PreparedCell cell = lab.prepare(cells[i]);
        CellOutput<R> out{cells[i], std::nullopt, {}};
        try {
          const Trajectory traj = lab.optimize(cell);
          out.value.emplace(fn(cell, traj));
        } catch (const AbortedRun& e) {
          out.abort_reason = e.what();
        }
        return out;
      });
}

/// Per-cell result of the standard pipeline.
struct CellRecord {
  std::vector<double> losses;
  std::size_t min_index = 0;
  RangeFooter footer;
  std::vector<AttackOutcome> min_loss;
  std::vector<AttackOutcome> multi_loss;
  bool provider_fell_back = false;
  /// Kept only when candidate images are to be saved.
  std::optional<Trajectory> trajectory;
};

/// Initial image, PGD, range selection, then the min-loss and multi-loss
/// attacks for every cell.
std::vector<CellOutput<CellRecord>> run_standard_cells(const Lab& lab,
                                                       const std::vector<CellSpec>& cells,
                                                       bool keep_trajectories = false);

/// Aggregates records into one row per (scenario, provider), in cell order.
EvalReport make_eval_report(const std::vector<CellOutput<CellRecord>>& records,
                            const std::vector<std::uint64_t>& seeds);

EvalReport evaluate_suite(const Lab& lab, const std::vector<CellSpec>& cells,
                          std::vector<CellOutput<CellRecord>>* records = nullptr);

}  // namespace mlai
