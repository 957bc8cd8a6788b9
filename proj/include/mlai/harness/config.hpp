#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mlai/defense/defense.hpp"
#include "mlai/models/model_config.hpp"
#include "mlai/scenario/providers.hpp"

namespace mlai {

struct AblationConfig {
  std::vector<std::size_t> rho_values = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::size_t max_images = 15;
  std::vector<ProviderKind> initial_images = {ProviderKind::Blank, ProviderKind::Irrelevant,
                                              ProviderKind::Matched};
  /// Named uniform-sharpness landscape suites for the image-count sweep.
  std::vector<std::pair<std::string, double>> count_suites = {{"sharp", 100.0}, {"flat", 1.0}};
};

struct ExperimentConfig {
  int schema_version = 1;
  ModelSpec model;
  std::vector<Category> scenarios;
  std::vector<ProviderKind> providers = {ProviderKind::Matched};
  std::size_t instructions_per_scenario = 10;
  /// Target corpus; empty selects the model default.
  std::vector<std::vector<std::size_t>> corpus;
  OptimizerConfig optimizer;
  RangeConfig range;
  Judge judge;
  DefenseConfig defense;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "out";
  /// 0 = hardware concurrency.
  std::size_t workers = 0;
  std::size_t image_requests_in_flight = 2;
  bool save_trajectories = true;
  bool save_candidate_images = false;
  AblationConfig ablation;
  std::vector<Category> transfer_sources;
  std::vector<Category> transfer_targets;
};

/// Schema (schema_version: 1). Top-level keys:
///   schema_version, model, scenarios (list of codes or "all"), providers,
///   instructions_per_scenario, corpus, optimizer {eps, step_size, iterations},
///   range {K, rho, window}, judge {threshold},
///   defense {similarity_threshold, grid: [h, w], history_capacity},
///   seeds (list, or {start, count}), output_dir, workers,
///   image_requests_in_flight, save_trajectories, save_candidate_images,
///   ablation {rho_values, max_images, initial_images, count_suites: {name: sharpness}},
///   transfer {sources, targets}
/// Every problem raises ConfigError with the line and column.
ExperimentConfig parse_experiment_config(std::string_view yaml_text,
                                         const std::string& source = "<string>");
ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace mlai
