#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "mlai/harness/experiments.hpp"

namespace mlai {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

struct CommandOptions {
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> workers;
  bool save_candidate_images = false;
  /// Ablation axis: initial-image | image-count | rho.
  std::string which;
  /// Test hooks.
  LabOptions lab;
};

/// Each command loads the config, runs, writes its artifacts plus
/// manifest.json under the output directory and returns an exit code:
/// 0 success (aborted runs are recorded as exclusions), 2 configuration
/// error, 3 runtime failure. Progress goes to `log`, errors to `err`.
int cmd_attack(const CommandOptions& opts, std::ostream& log, std::ostream& err);
int cmd_ablate(const CommandOptions& opts, std::ostream& log, std::ostream& err);
int cmd_transfer(const CommandOptions& opts, std::ostream& log, std::ostream& err);
int cmd_defend(const CommandOptions& opts, std::ostream& log, std::ostream& err);

}  // namespace mlai
