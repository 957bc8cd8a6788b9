// mlai: command-line front end for the attack, ablation, transfer and
// defense experiments.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mlai/harness/commands.hpp"
#include "mlai/harness/manifest.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Multi-loss adversarial image experiments on toy targets"};
  app.set_version_flag("--version", mlai::tool_version());
  app.require_subcommand(1);

  mlai::CommandOptions opts;
  std::string out_dir;
  std::size_t workers = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "experiment configuration (YAML)")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
    sub->add_option("--workers", workers, "worker threads (0 = logical cores)");
    sub->add_flag("--save-candidate-images", opts.save_candidate_images,
                  "write every candidate image next to the trajectories");
  };
  auto* attack = app.add_subcommand("attack", "scenario image, PGD, loss range, collaborative attack");
  auto* ablate = app.add_subcommand("ablate", "sweep one axis holding the rest fixed");
  auto* transfer = app.add_subcommand("transfer", "cross-scenario transfer matrix");
  auto* defend = app.add_subcommand("defend", "similarity-deduplication defense comparison");
  for (auto* s : {attack, ablate, transfer, defend}) add_common(s);
  ablate->add_option("--which", opts.which, "initial-image | image-count | rho")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : mlai::kExitConfig;
  }
  if (!out_dir.empty()) opts.out_dir = out_dir;
  if (workers > 0) opts.workers = workers;

  if (attack->parsed()) return mlai::cmd_attack(opts, std::cout, std::cerr);
  if (ablate->parsed()) return mlai::cmd_ablate(opts, std::cout, std::cerr);
  if (transfer->parsed()) return mlai::cmd_transfer(opts, std::cout, std::cerr);
  return mlai::cmd_defend(opts, std::cout, std::cerr);
}
