#include "mlai/harness/commands.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "mlai/harness/manifest.hpp"
#include "mlai/lossrange/trajectory_io.hpp"

namespace mlai {

namespace fs = std::filesystem;

namespace {

class ConfigStageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Session {
  ExperimentConfig cfg;
  std::shared_ptr<const Taxonomy> taxonomy;
  fs::path out;
  RunManifest manifest;
};

Session open_session(const std::string& command, const CommandOptions& opts) {
  if (opts.config_path.empty()) throw ConfigError("<cli>", 0, 0, "--config is required");
  if (!fs::is_regular_file(opts.config_path)) {
    throw ConfigError(opts.config_path, 0, 0, "configuration file not found");
  }
  ExperimentConfig cfg = load_experiment_config(opts.config_path);
  if (opts.out_dir) cfg.output_dir = *opts.out_dir;
  if (opts.workers) cfg.workers = *opts.workers;
  if (opts.save_candidate_images) cfg.save_candidate_images = true;
  auto taxonomy = std::make_shared<const Taxonomy>(Taxonomy::load_default());
  RunManifest manifest(command, opts.config_path);
  fs::path out = cfg.output_dir;
  fs::create_directories(out);
  return {std::move(cfg), std::move(taxonomy), std::move(out), std::move(manifest)};
}

void emit(Session& s, const fs::path& name, const std::string& content) {
  const fs::path p = s.out / name;
  write_text_atomic(p, content);
  s.manifest.add_artifact(p);
}

void finish(Session& s) {
  s.manifest.end_stage();
  const fs::path p = s.out / "manifest.json";
  s.manifest.write(p);
}

// Runs `body`, mapping failures to exit codes.
int guarded(const char* name, std::ostream& err, const std::function<void()>& body) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& e) {
    err << name << ": config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ConfigStageError& e) {
    err << name << ": config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << name << ": aborted: " << e.what() << '\n';
    return kExitRuntime;
  }
}

std::unique_ptr<Lab> checked_lab(const Session& s, const LabOptions& opts) {
  try {
    return make_lab(s.cfg, s.taxonomy, opts);
  } catch (const std::invalid_argument& e) {
    throw ConfigStageError(e.what());
  }
}

std::string pct(double v) { return format_percent(v); }

}  // namespace

int cmd_attack(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded("attack", err, [&] {
    Session s = open_session("attack", opts);
    auto lab = checked_lab(s, opts.lab);
    s.manifest.begin_stage("optimize_and_evaluate");
    const auto cells = lab->cells();
    auto records = run_standard_cells(*lab, cells, s.cfg.save_candidate_images);
    const EvalReport report = make_eval_report(records, s.cfg.seeds);

    s.manifest.begin_stage("write_artifacts");
    if (s.cfg.save_trajectories) {
      fs::create_directories(s.out / "trajectories");
      for (const auto& r : records) {
        if (!r.value) continue;
        std::ostringstream body;
        write_trajectory_jsonl(body, r.value->losses, r.value->footer);
        emit(s, fs::path("trajectories") / (r.spec.label() + ".jsonl"), body.str());
      }
    }
    if (s.cfg.save_candidate_images) {
      for (const auto& r : records) {
        if (!r.value || !r.value->trajectory) continue;
        for (const auto& p : save_candidate_images(*r.value->trajectory,
                                                   s.out / "candidates" / r.spec.label(), "candidate")) {
          s.manifest.add_artifact(p);
        }
      }
    }
    std::size_t fallbacks = 0;
    for (const auto& r : records) fallbacks += (r.value && r.value->provider_fell_back) ? 1 : 0;
    emit(s, "eval.csv", eval_report_csv(report));
    emit(s, "eval.json", eval_report_json(report));
    s.manifest.note("excluded_runs", std::to_string(report.total_excluded()));
    s.manifest.note("provider_fallbacks", std::to_string(fallbacks));
    finish(s);
    for (const auto& row : report.rows) {
      log << to_code(row.scenario) << ' ' << row.provider << " min-loss " << pct(row.min_loss.asr())
          << " multi-loss " << pct(row.multi_loss.asr()) << " (excluded " << row.excluded << ")\n";
    }
  });
}

int cmd_ablate(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded("ablate", err, [&] {
    if (opts.which != "initial-image" && opts.which != "image-count" && opts.which != "rho") {
      throw ConfigError("<cli>", 0, 0,
                        "unknown ablation axis '" + opts.which +
                            "' (expected initial-image, image-count or rho)");
    }
    Session s = open_session("ablate " + opts.which, opts);
    (void)checked_lab(s, opts.lab);
    s.manifest.begin_stage("sweep");
    std::ostringstream tsv;
    if (opts.which == "initial-image") {
      const auto rows = ablate_initial_image(s.cfg, s.taxonomy, opts.lab);
      tsv << "provider\truns\texcluded\tn\tmin_loss_asr\tmulti_loss_asr\n";
      for (const auto& r : rows) {
        tsv << to_string(r.provider) << '\t' << r.runs << '\t' << r.excluded << '\t'
            << r.multi_loss.n << '\t' << pct(r.min_loss.asr()) << '\t' << pct(r.multi_loss.asr())
            << '\n';
        log << to_string(r.provider) << ": multi-loss ASR " << pct(r.multi_loss.asr()) << '\n';
      }
      s.manifest.begin_stage("write_artifacts");
      emit(s, "ablate_initial_image.tsv", tsv.str());
    } else if (opts.which == "image-count") {
      const auto curves = ablate_image_count(s.cfg, s.taxonomy, opts.lab);
      tsv << "suite\timages\tn\tasr\n";
      std::ostringstream summary;
      summary << "suite\tplateau_images\texcluded\n";
      for (const auto& c : curves) {
        for (std::size_t i = 0; i < c.by_count.size(); ++i) {
          tsv << c.suite << '\t' << i + 1 << '\t' << c.by_count[i].n << '\t'
              << pct(c.by_count[i].asr()) << '\n';
        }
        summary << c.suite << '\t' << c.plateau << '\t' << c.excluded << '\n';
        s.manifest.note("plateau_" + c.suite, std::to_string(c.plateau));
        log << c.suite << ": plateau at " << c.plateau << " images\n";
      }
      s.manifest.begin_stage("write_artifacts");
      emit(s, "ablate_image_count.tsv", tsv.str());
      emit(s, "ablate_image_count_plateau.tsv", summary.str());
    } else {
      const auto sweep = ablate_rho(s.cfg, s.taxonomy, opts.lab);
      tsv << "rho\tn\tsuccesses\tasr\tmean_set_size\n";
      for (const auto& p : sweep.points) {
        char size[32];
        std::snprintf(size, sizeof size, "%.2f", p.mean_set_size);
        tsv << p.rho << '\t' << p.multi_loss.n << '\t' << p.multi_loss.successes << '\t'
            << pct(p.multi_loss.asr()) << '\t' << size << '\n';
      }
      s.manifest.note("rho_knee", std::to_string(sweep.knee));
      s.manifest.note("excluded_runs", std::to_string(sweep.excluded));
      log << "rho knee at " << sweep.knee << '\n';
      s.manifest.begin_stage("write_artifacts");
      emit(s, "ablate_rho.tsv", tsv.str());
    }
    finish(s);
  });
}

int cmd_transfer(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded("transfer", err, [&] {
    Session s = open_session("transfer", opts);
    (void)checked_lab(s, opts.lab);
    s.manifest.begin_stage("transfer");
    const auto res = run_transfer(s.cfg, s.taxonomy, opts.lab);
    s.manifest.begin_stage("write_artifacts");
    emit(s, "transfer_matrix.csv", transfer_matrix_csv(res.matrix));
    s.manifest.note("excluded_runs", std::to_string(res.excluded));
    finish(s);
    log << "transfer matrix written (" << res.excluded << " excluded runs)\n";
  });
}

int cmd_defend(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded("defend", err, [&] {
    Session s = open_session("defend", opts);
    (void)checked_lab(s, opts.lab);
    s.manifest.begin_stage("defend");
    const auto run = run_defense(s.cfg, s.taxonomy, opts.lab);
    s.manifest.begin_stage("write_artifacts");
    std::ostringstream csv;
    csv << "scenario,runs,excluded,n,undefended_asr,defended_asr,reduction,mean_set_size,"
           "mean_admitted\n";
    for (const auto& r : run.rows) {
      char sizes[64];
      std::snprintf(sizes, sizeof sizes, "%.2f,%.2f", r.mean_set_size, r.mean_admitted);
      csv << to_code(r.scenario) << ',' << r.runs << ',' << r.excluded << ',' << r.undefended.n
          << ',' << pct(r.undefended.asr()) << ',' << pct(r.defended.asr()) << ','
          << pct(r.reduction()) << ',' << sizes << '\n';
      log << to_code(r.scenario) << ": undefended " << pct(r.undefended.asr()) << " defended "
          << pct(r.defended.asr()) << '\n';
    }
    std::ostringstream events;
    for (const auto& e : run.events) write_defense_event(events, e.batch_id, e.filter);
    emit(s, "defense.csv", csv.str());
    emit(s, "defense_events.jsonl", events.str());
    finish(s);
  });
}

}  // namespace mlai
