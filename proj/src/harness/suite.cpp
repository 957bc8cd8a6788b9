#include "mlai/harness/suite.hpp"

#include <algorithm>

namespace mlai {

std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  return std::max<unsigned>(1, std::thread::hardware_concurrency());
}

std::vector<CellOutput<CellRecord>> run_standard_cells(const Lab& lab,
                                                       const std::vector<CellSpec>& cells,
                                                       bool keep_trajectories) {
  const auto& cfg = lab.config();
  std::function<CellRecord(const PreparedCell&, const Trajectory&)> fn =
      [&](const PreparedCell& cell, const Trajectory& traj) {
        CellRecord rec;
        for (const auto& c : traj.candidates) rec.losses.push_back(c.loss);
        rec.min_index = traj.min_index;
        const RangeAnalysis a = analyze_trajectory(traj, cfg.range);
        rec.footer = make_footer(a, cfg.range);
        const CandidateSet single = singleton_set(traj);
        for (const auto& in : cell.instructions) {
          rec.min_loss.push_back(collaborative_attack(*cell.models.eval, single, in, cfg.judge));
          rec.multi_loss.push_back(collaborative_attack(*cell.models.eval, a.set, in, cfg.judge));
        }
        rec.provider_fell_back = cell.provider_fell_back;
        if (keep_trajectories) rec.trajectory = traj;
        return rec;
      };
  return run_cells<CellRecord>(lab, cells, fn);
}

EvalReport make_eval_report(const std::vector<CellOutput<CellRecord>>& records,
                            const std::vector<std::uint64_t>& seeds) {
  EvalReport report;
  report.seeds = seeds;
  std::vector<double> set_sizes;
  auto row_for = [&](const CellSpec& s) -> EvalRow& {
    const auto prov = std::string(to_string(s.provider));
    for (auto& r : report.rows) {
      if (r.scenario == s.scenario && r.provider == prov) return r;
    }
    report.rows.push_back({s.scenario, prov, 0, 0, {}, {}, 0.0});
    set_sizes.push_back(0.0);
    return report.rows.back();
  };
  for (const auto& rec : records) {
    EvalRow& row = row_for(rec.spec);
    const auto idx = static_cast<std::size_t>(&row - report.rows.data());
    ++row.runs;
    if (!rec.value) {
      ++row.excluded;
      continue;
    }
    row.min_loss.add(rec.value->min_loss);
    row.multi_loss.add(rec.value->multi_loss);
    set_sizes[idx] += static_cast<double>(rec.value->footer.selected_iterations.size());
  }
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    const std::size_t kept = r.runs - r.excluded;
    report.rows[i].mean_set_size = kept == 0 ? 0.0 : set_sizes[i] / static_cast<double>(kept);
  }
  return report;
}

EvalReport evaluate_suite(const Lab& lab, const std::vector<CellSpec>& cells,
                          std::vector<CellOutput<CellRecord>>* records) {
  if (cells.empty()) throw std::invalid_argument("evaluate_suite needs at least one cell");
  auto recs = run_standard_cells(lab, cells, false);
  EvalReport report = make_eval_report(recs, lab.config().seeds);
  if (records) *records = std::move(recs);
  return report;
}

}  // namespace mlai
