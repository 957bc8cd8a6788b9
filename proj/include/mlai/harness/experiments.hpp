#pragma once

#include <map>
#include <string>
#include <vector>

#include "mlai/harness/suite.hpp"
#include "mlai/scenario/transfer.hpp"

namespace mlai {

struct LabOptions {
  TrajectoryObserver observer;
  ModelFactory factory;
  std::shared_ptr<const ImageClient> image_client;
};

std::unique_ptr<Lab> make_lab(const ExperimentConfig& cfg,
                              std::shared_ptr<const Taxonomy> taxonomy, const LabOptions& opts);

struct InitialImageRow {
  ProviderKind provider = ProviderKind::Blank;
  std::size_t runs = 0;
  std::size_t excluded = 0;
  ConditionTally min_loss;
  ConditionTally multi_loss;
};

/// Every configured scenario and seed, once per initial-image kind.
std::vector<InitialImageRow> ablate_initial_image(const ExperimentConfig& cfg,
                                                  std::shared_ptr<const Taxonomy> taxonomy,
                                                  const LabOptions& opts = {});

struct CountCurve {
  std::string suite;
  /// asr[n-1]: ASR with the n candidates nearest the minimum.
  std::vector<ConditionTally> by_count;
  std::size_t excluded = 0;
  /// Smallest n whose ASR is within `tolerance` of the largest count's ASR.
  std::size_t plateau = 0;
};

inline constexpr double kPlateauTolerance = 0.02;

/// For landscape models one curve per ablation.count_suites entry (uniform
/// sharpness); for the toy model a single curve named "model".
std::vector<CountCurve> ablate_image_count(const ExperimentConfig& cfg,
                                           std::shared_ptr<const Taxonomy> taxonomy,
                                           const LabOptions& opts = {});

struct RhoPoint {
  std::size_t rho = 0;
  ConditionTally multi_loss;
  double mean_set_size = 0.0;
};

struct RhoSweep {
  std::vector<RhoPoint> points;
  std::size_t excluded = 0;
  /// Smallest rho reaching 90% of the sweep's total ASR gain.
  std::size_t knee = 0;
};

inline constexpr double kKneeFraction = 0.9;

RhoSweep ablate_rho(const ExperimentConfig& cfg, std::shared_ptr<const Taxonomy> taxonomy,
                    const LabOptions& opts = {});

struct TransferResult {
  TransferMatrix matrix;
  std::size_t excluded = 0;
};

/// For every source scenario and seed: matched image of the source, PGD on
/// the source instructions, range selection, then collaborative attacks on
/// every target scenario's instructions.
TransferResult run_transfer(const ExperimentConfig& cfg, std::shared_ptr<const Taxonomy> taxonomy,
                            const LabOptions& opts = {});

struct DefenseRow {
  Category scenario = Category::IA;
  std::size_t runs = 0;
  std::size_t excluded = 0;
  ConditionTally undefended;
  ConditionTally defended;
  double mean_set_size = 0.0;
  double mean_admitted = 0.0;

  double reduction() const { return undefended.asr() - defended.asr(); }
};

struct DefenseEvent {
  std::string batch_id;
  FilterResult filter;
};

struct DefenseRun {
  std::vector<DefenseRow> rows;
  std::vector<DefenseEvent> events;
  /// Per cell, in cell order: undefended and defended ASR.
  std::vector<std::pair<double, double>> cell_asr;
};

DefenseRun run_defense(const ExperimentConfig& cfg, std::shared_ptr<const Taxonomy> taxonomy,
                       const LabOptions& opts = {});

}  // namespace mlai
