#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mlai/harness/config.hpp"
#include "mlai/lossrange/lossrange.hpp"
#include "mlai/scenario/taxonomy.hpp"

namespace mlai {

/// One (scenario, initial-image provider, seed) evaluation unit.
struct CellSpec {
  Category scenario = Category::IA;
  ProviderKind provider = ProviderKind::Matched;
  std::uint64_t seed = 0;

  /// "<code>_<provider>_s<seed>", used for artifact names.
  std::string label() const;
};

/// The model PGD descends on and the model responses are judged on. They are
/// the same object except for shifted landscapes.
struct CellModels {
  std::shared_ptr<const TargetModel> train;
  std::shared_ptr<const TargetModel> eval;
};

struct PreparedCell {
  CellSpec spec;
  std::vector<Instruction> instructions;
  CellModels models;
  Image init;
  bool provider_fell_back = false;
};

using ModelFactory = std::function<CellModels(const CellSpec&, const Image& init)>;
/// Called from worker threads for every finished or aborted run.
using TrajectoryObserver = std::function<void(const CellSpec&, const Trajectory&)>;

class Lab {
 public:
  Lab(ExperimentConfig cfg, std::shared_ptr<const Taxonomy> taxonomy);

  const ExperimentConfig& config() const { return cfg_; }
  const Taxonomy& taxonomy() const { return *taxonomy_; }
  const TargetCorpus& corpus() const { return corpus_; }
  Shape input_shape() const { return shape_; }
  /// Prototypes the matched provider paints.
  const EmbeddingSet& embeddings() const { return embeddings_; }

  /// Scenario x provider x seed, in that nesting order.
  std::vector<CellSpec> cells() const;
  std::vector<CellSpec> cells(const std::vector<Category>& scenarios,
                              const std::vector<ProviderKind>& providers) const;

  std::vector<Instruction> instructions_for(Category c) const;
  /// Initial image, models and instructions of a cell. Deterministic.
  PreparedCell prepare(const CellSpec& spec) const;
  /// run_pgd on the training model; the observer sees the trajectory, or the
  /// partial trajectory before an AbortedRun propagates.
  Trajectory optimize(const PreparedCell& cell) const;

  void set_model_factory(ModelFactory f) { factory_ = std::move(f); }
  void set_observer(TrajectoryObserver o) { observer_ = std::move(o); }
  void set_image_client(std::shared_ptr<const ImageClient> c) { client_ = std::move(c); }

 private:
  CellModels default_models(const CellSpec& spec, const Image& init) const;

  ExperimentConfig cfg_;
  std::shared_ptr<const Taxonomy> taxonomy_;
  TargetCorpus corpus_;
  Shape shape_;
  EmbeddingSet embeddings_;
  ModelFactory factory_;
  TrajectoryObserver observer_;
  std::shared_ptr<const ImageClient> client_;
};

/// Empty string when every candidate lies in [0,1] and within eps (+1e-12) of
/// the initial image; otherwise a description of the first violation.
std::string check_trajectory_constraints(const Trajectory& traj);

}  // namespace mlai
