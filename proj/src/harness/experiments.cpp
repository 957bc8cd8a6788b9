#include "mlai/harness/experiments.hpp"

#include <algorithm>

namespace mlai {

std::unique_ptr<Lab> make_lab(const ExperimentConfig& cfg,
                              std::shared_ptr<const Taxonomy> taxonomy, const LabOptions& opts) {
  auto lab = std::make_unique<Lab>(cfg, std::move(taxonomy));
  if (opts.observer) lab->set_observer(opts.observer);
  if (opts.factory) lab->set_model_factory(opts.factory);
  if (opts.image_client) lab->set_image_client(opts.image_client);
  return lab;
}

std::vector<InitialImageRow> ablate_initial_image(const ExperimentConfig& cfg,
                                                  std::shared_ptr<const Taxonomy> taxonomy,
                                                  const LabOptions& opts) {
  auto lab = make_lab(cfg, std::move(taxonomy), opts);
  const auto cells = lab->cells(cfg.scenarios, cfg.ablation.initial_images);
  const auto recs = run_standard_cells(*lab, cells);
  std::vector<InitialImageRow> rows;
  for (ProviderKind p : cfg.ablation.initial_images) rows.push_back({p, 0, 0, {}, {}});
  for (const auto& r : recs) {
    auto& row = *std::find_if(rows.begin(), rows.end(),
                              [&](const InitialImageRow& x) { return x.provider == r.spec.provider; });
    ++row.runs;
    if (!r.value) {
      ++row.excluded;
      continue;
    }
    row.min_loss.add(r.value->min_loss);
    row.multi_loss.add(r.value->multi_loss);
  }
  return rows;
}

std::vector<CountCurve> ablate_image_count(const ExperimentConfig& cfg,
                                           std::shared_ptr<const Taxonomy> taxonomy,
                                           const LabOptions& opts) {
  std::vector<std::pair<std::string, ExperimentConfig>> suites;
  if (cfg.model.kind == ModelKind::SyntheticLandscape) {
    for (const auto& [name, sharpness] : cfg.ablation.count_suites) {
      ExperimentConfig c = cfg;
      c.model.landscape.sharpness.fill(sharpness);
      suites.emplace_back(name, std::move(c));
    }
  } else {
    suites.emplace_back("model", cfg);
  }
  const std::size_t max_n = cfg.ablation.max_images;
  std::vector<CountCurve> curves;
  for (const auto& [name, c] : suites) {
    auto lab = make_lab(c, taxonomy, opts);
    const auto cells = lab->cells(c.scenarios, {c.providers.front()});
    std::function<std::vector<std::vector<AttackOutcome>>(const PreparedCell&, const Trajectory&)> fn =
        [&](const PreparedCell& cell, const Trajectory& traj) {
          std::vector<std::vector<AttackOutcome>> per_n;
          for (std::size_t n = 1; n <= max_n; ++n) {
            const CandidateSet set = nearest_candidates(traj, n);
            std::vector<AttackOutcome> outs;
            for (const auto& in : cell.instructions) {
              outs.push_back(collaborative_attack(*cell.models.eval, set, in, c.judge));
            }
            per_n.push_back(std::move(outs));
          }
          return per_n;
        };
    const auto recs = run_cells(*lab, cells, fn);
    CountCurve curve{name, std::vector<ConditionTally>(max_n), 0, 0};
    for (const auto& r : recs) {
      if (!r.value) {
        ++curve.excluded;
        continue;
      }
      for (std::size_t n = 0; n < max_n; ++n) curve.by_count[n].add((*r.value)[n]);
    }
    const double top = curve.by_count.back().asr();
    curve.plateau = max_n;
    for (std::size_t n = 0; n < max_n; ++n) {
      if (curve.by_count[n].asr() >= top - kPlateauTolerance) {
        curve.plateau = n + 1;
        break;
      }
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

RhoSweep ablate_rho(const ExperimentConfig& cfg, std::shared_ptr<const Taxonomy> taxonomy,
                    const LabOptions& opts) {
  auto lab = make_lab(cfg, std::move(taxonomy), opts);
  const auto cells = lab->cells(cfg.scenarios, {cfg.providers.front()});
  const auto& rhos = cfg.ablation.rho_values;
  struct PerRho {
    std::vector<AttackOutcome> outcomes;
    std::size_t set_size;
  };
  std::function<std::vector<PerRho>(const PreparedCell&, const Trajectory&)> fn =
      [&](const PreparedCell& cell, const Trajectory& traj) {
        std::vector<PerRho> out;
        for (std::size_t rho : rhos) {
          RangeConfig rc = cfg.range;
          rc.rho = rho;
          const RangeAnalysis a = analyze_trajectory(traj, rc);
          PerRho pr{{}, a.set.size()};
          for (const auto& in : cell.instructions) {
            pr.outcomes.push_back(collaborative_attack(*cell.models.eval, a.set, in, cfg.judge));
          }
          out.push_back(std::move(pr));
        }
        return out;
      };
  const auto recs = run_cells(*lab, cells, fn);
  RhoSweep sweep;
  for (std::size_t rho : rhos) sweep.points.push_back({rho, {}, 0.0});
  std::size_t kept = 0;
  for (const auto& r : recs) {
    if (!r.value) {
      ++sweep.excluded;
      continue;
    }
    ++kept;
    for (std::size_t i = 0; i < rhos.size(); ++i) {
      sweep.points[i].multi_loss.add((*r.value)[i].outcomes);
      sweep.points[i].mean_set_size += static_cast<double>((*r.value)[i].set_size);
    }
  }
  for (auto& p : sweep.points) p.mean_set_size = kept ? p.mean_set_size / static_cast<double>(kept) : 0.0;
  const double lo = sweep.points.front().multi_loss.asr();
  const double hi = sweep.points.back().multi_loss.asr();
  sweep.knee = sweep.points.back().rho;
  for (const auto& p : sweep.points) {
    if (p.multi_loss.asr() >= lo + kKneeFraction * (hi - lo)) {
      sweep.knee = p.rho;
      break;
    }
  }
  return sweep;
}

TransferResult run_transfer(const ExperimentConfig& cfg, std::shared_ptr<const Taxonomy> taxonomy,
                            const LabOptions& opts) {
  auto lab = make_lab(cfg, std::move(taxonomy), opts);
  const auto cells = lab->cells(cfg.transfer_sources, {ProviderKind::Matched});
  const auto& targets = cfg.transfer_targets;
  std::vector<std::vector<Instruction>> target_instr;
  for (Category t : targets) target_instr.push_back(lab->instructions_for(t));

  std::function<std::vector<std::vector<AttackOutcome>>(const PreparedCell&, const Trajectory&)> fn =
      [&](const PreparedCell& cell, const Trajectory& traj) {
        const RangeAnalysis a = analyze_trajectory(traj, cfg.range);
        std::vector<std::vector<AttackOutcome>> per_target;
        for (const auto& instrs : target_instr) {
          std::vector<AttackOutcome> outs;
          for (const auto& in : instrs) {
            outs.push_back(collaborative_attack(*cell.models.eval, a.set, in, cfg.judge));
          }
          per_target.push_back(std::move(outs));
        }
        return per_target;
      };
  const auto recs = run_cells(*lab, cells, fn);
  TransferOutcomes outcomes;
  for (Category s : cfg.transfer_sources)
    for (Category t : targets) outcomes[{s, t}];
  TransferResult res;
  for (const auto& r : recs) {
    if (!r.value) {
      ++res.excluded;
      continue;
    }
    for (std::size_t ti = 0; ti < targets.size(); ++ti) {
      auto& dst = outcomes[{r.spec.scenario, targets[ti]}];
      dst.insert(dst.end(), (*r.value)[ti].begin(), (*r.value)[ti].end());
    }
  }
  res.matrix = transfer_matrix(outcomes);
  return res;
}

DefenseRun run_defense(const ExperimentConfig& cfg, std::shared_ptr<const Taxonomy> taxonomy,
                       const LabOptions& opts) {
  auto lab = make_lab(cfg, std::move(taxonomy), opts);
  const auto cells = lab->cells(cfg.scenarios, {cfg.providers.front()});
  std::function<DefendedResult(const PreparedCell&, const Trajectory&)> fn =
      [&](const PreparedCell& cell, const Trajectory& traj) {
        const RangeAnalysis a = analyze_trajectory(traj, cfg.range);
        return defended_attack(*cell.models.eval, a.set, cell.instructions, cfg.judge, cfg.defense);
      };
  const auto recs = run_cells(*lab, cells, fn);
  DefenseRun run;
  for (Category c : cfg.scenarios) run.rows.push_back({c, 0, 0, {}, {}, 0.0, 0.0});
  for (const auto& r : recs) {
    auto& row = *std::find_if(run.rows.begin(), run.rows.end(),
                              [&](const DefenseRow& x) { return x.scenario == r.spec.scenario; });
    ++row.runs;
    if (!r.value) {
      ++row.excluded;
      continue;
    }
    row.undefended.add(r.value->undefended);
    row.defended.add(r.value->defended);
    row.mean_set_size += static_cast<double>(r.value->set_size);
    row.mean_admitted += static_cast<double>(r.value->admitted);
    run.events.push_back({r.spec.label(), r.value->filter});
    run.cell_asr.emplace_back(r.value->undefended_asr, r.value->defended_asr);
  }
  for (auto& row : run.rows) {
    const std::size_t kept = row.runs - row.excluded;
    if (kept > 0) {
      row.mean_set_size /= static_cast<double>(kept);
      row.mean_admitted /= static_cast<double>(kept);
    }
  }
  return run;
}

}  // namespace mlai
