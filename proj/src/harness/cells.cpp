#include "mlai/harness/cells.hpp"

#include <stdexcept>

#include "mlai/models/landscape.hpp"
#include "mlai/models/toy_vlm.hpp"

namespace mlai {

std::string CellSpec::label() const {
  return std::string(to_code(scenario)) + "_" + std::string(to_string(provider)) + "_s" +
         std::to_string(seed);
}

namespace {

TargetCorpus corpus_for(const ExperimentConfig& cfg) {
  if (!cfg.corpus.empty()) return TargetCorpus(cfg.corpus);
  if (cfg.model.kind == ModelKind::ToyVlm) return default_corpus(cfg.model.toy.harmful_tokens);
  return TargetCorpus(std::vector<std::vector<std::size_t>>{{1}});
}

Shape shape_for(const ModelSpec& m) {
  if (m.kind == ModelKind::ToyVlm) return {m.toy.height, m.toy.width, m.toy.channels};
  return {m.landscape.height, m.landscape.width, m.landscape.channels};
}

EmbeddingSet embeddings_for(const ModelSpec& m) {
  if (m.kind == ModelKind::ToyVlm) {
    EmbeddingSpec es = m.toy.embeddings;
    es.grid_h = m.toy.height / m.toy.patch_size;
    es.grid_w = m.toy.width / m.toy.patch_size;
    return make_embeddings(es);
  }
  return make_embeddings(m.landscape.embeddings);
}

}  // namespace

Lab::Lab(ExperimentConfig cfg, std::shared_ptr<const Taxonomy> taxonomy)
    : cfg_(std::move(cfg)),
      taxonomy_(std::move(taxonomy)),
      corpus_(corpus_for(cfg_)),
      shape_(shape_for(cfg_.model)),
      embeddings_(embeddings_for(cfg_.model)) {
  if (!taxonomy_) throw std::invalid_argument("lab needs a taxonomy");
  for (Category c : cfg_.scenarios) {
    if (taxonomy_->instructions(c).size() < cfg_.instructions_per_scenario) {
      throw std::invalid_argument("scenario " + std::string(to_code(c)) + " has only " +
                                  std::to_string(taxonomy_->instructions(c).size()) +
                                  " bundled instructions");
    }
  }
}

std::vector<CellSpec> Lab::cells() const { return cells(cfg_.scenarios, cfg_.providers); }

std::vector<CellSpec> Lab::cells(const std::vector<Category>& scenarios,
                                 const std::vector<ProviderKind>& providers) const {
  std::vector<CellSpec> out;
  for (Category c : scenarios)
    for (ProviderKind p : providers)
      for (std::uint64_t s : cfg_.seeds) out.push_back({c, p, s});
  return out;
}

std::vector<Instruction> Lab::instructions_for(Category c) const {
  const auto& all = taxonomy_->instructions(c);
  if (all.size() < cfg_.instructions_per_scenario) {
    throw std::invalid_argument("not enough instructions for " + std::string(to_code(c)));
  }
  return {all.begin(), all.begin() + static_cast<std::ptrdiff_t>(cfg_.instructions_per_scenario)};
}

CellModels Lab::default_models(const CellSpec& spec, const Image& init) const {
  const Seed base = cfg_.model.seed;
  if (cfg_.model.kind == ModelKind::ToyVlm) {
    auto m = make_toy_vlm(derive_seed(base, "cell-model", spec.seed), cfg_.model.toy);
    return {m, m};
  }
  auto cell = make_landscape_cell(cfg_.model.landscape, spec.scenario,
                                  derive_seed(base, "cell-landscape", spec.seed), init);
  return {cell.train, cell.eval};
}

PreparedCell Lab::prepare(const CellSpec& spec) const {
  auto instructions = instructions_for(spec.scenario);
  const ScenarioPrompt prompt = build_prompt(*taxonomy_, spec.scenario, instructions.front());
  ImageProvider provider{spec.provider, derive_seed(Seed{spec.seed}, "provider"), client_};
  bool fell_back = false;
  Image init = provide_image_or_matched(provider, prompt, shape_, embeddings_, &fell_back);
  CellModels models = factory_ ? factory_(spec, init) : default_models(spec, init);
  if (!models.train || !models.eval) throw std::logic_error("model factory returned null");
  return {spec, std::move(instructions), std::move(models), std::move(init), fell_back};
}

Trajectory Lab::optimize(const PreparedCell& cell) const {
  OptimizerConfig oc = cfg_.optimizer;
  oc.seed = Seed{cell.spec.seed};
  try {
    Trajectory t = run_pgd(*cell.models.train, cell.init, cell.instructions, corpus_, oc);
    if (observer_) observer_(cell.spec, t);
    return t;
  } catch (const AbortedRun& e) {
    if (observer_) observer_(cell.spec, e.partial());
    throw;
  }
}

std::string check_trajectory_constraints(const Trajectory& traj) {
  const double limit = traj.config.eps + 1e-12;
  for (const auto& c : traj.candidates) {
    const auto px = c.image.data();
    for (std::size_t i = 0; i < px.size(); ++i) {
      if (!(px[i] >= 0.0 && px[i] <= 1.0)) {
        return "iteration " + std::to_string(c.iteration) + ": pixel outside [0,1]";
      }
    }
    const double d = linf_distance(c.image, traj.initial_image);
    if (!(d <= limit)) {
      return "iteration " + std::to_string(c.iteration) + ": L-inf distance " +
             std::to_string(d) + " exceeds eps";
    }
  }
  return {};
}

}  // namespace mlai
