#include "mlai/harness/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "internal/yaml_util.hpp"

namespace mlai {

using detail::fail_at;
using detail::MapReader;
using detail::scalar_as;

namespace {

std::vector<Category> categories_from(const YAML::Node& n, const std::string& src,
                                      const std::string& what) {
  std::vector<Category> out;
  if (n.IsScalar() && n.Scalar() == "all") return {kAllCategories.begin(), kAllCategories.end()};
  if (!n.IsSequence()) fail_at(src, n, what + ": expected a list of scenario codes or 'all'");
  for (const auto& item : n) {
    const Category c = detail::category_at(item, src, what);
    if (std::find(out.begin(), out.end(), c) != out.end()) fail_at(src, item, what + ": duplicate code");
    out.push_back(c);
  }
  return out;
}

std::vector<ProviderKind> providers_from(const YAML::Node& n, const std::string& src,
                                         const std::string& what) {
  if (!n.IsSequence()) fail_at(src, n, what + ": expected a list");
  std::vector<ProviderKind> out;
  for (const auto& item : n) {
    const auto s = scalar_as<std::string>(item, src, what);
    try {
      out.push_back(parse_provider_kind(s));
    } catch (const std::invalid_argument& e) {
      fail_at(src, item, what + ": " + e.what());
    }
  }
  if (out.empty()) fail_at(src, n, what + ": must not be empty");
  return out;
}

template <class T>
std::vector<T> list_of(const YAML::Node& n, const std::string& src, const std::string& what) {
  if (!n.IsSequence()) fail_at(src, n, what + ": expected a list");
  std::vector<T> out;
  for (const auto& item : n) out.push_back(scalar_as<T>(item, src, what));
  return out;
}

void check(bool ok, const std::string& src, const YAML::Node& n, const std::string& msg) {
  if (!ok) fail_at(src, n, msg);
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view yaml_text, const std::string& source) {
  const YAML::Node doc = detail::load_document(std::string(yaml_text), source);
  if (!doc || doc.IsNull()) throw ConfigError(source, 0, 0, "empty configuration");
  MapReader r(doc, source, "");
  ExperimentConfig cfg;
  const auto& src = source;

  cfg.schema_version = r.require<int>("schema_version");
  check(cfg.schema_version == 1, src, doc["schema_version"], "unsupported schema_version (expected 1)");

  if (const auto m = r.child("model")) cfg.model = detail::model_spec_from(m, src, "model");

  const YAML::Node sc = r.child("scenarios");
  if (!sc) fail_at(src, doc, "missing required key 'scenarios'");
  cfg.scenarios = categories_from(sc, src, "scenarios");
  check(!cfg.scenarios.empty(), src, sc, "scenarios: must list at least one scenario");

  if (const auto p = r.child("providers")) cfg.providers = providers_from(p, src, "providers");
  r.read("instructions_per_scenario", cfg.instructions_per_scenario);
  check(cfg.instructions_per_scenario >= 1, src, doc, "instructions_per_scenario must be >= 1");

  if (const auto c = r.child("corpus")) {
    if (!c.IsSequence()) fail_at(src, c, "corpus: expected a list of token lists");
    for (const auto& e : c) {
      auto tokens = list_of<std::size_t>(e, src, "corpus");
      check(!tokens.empty(), src, e, "corpus: entries must be non-empty");
      cfg.corpus.push_back(std::move(tokens));
    }
    check(!cfg.corpus.empty(), src, c, "corpus: must not be empty");
  }

  if (const auto o = r.child("optimizer")) {
    MapReader orr(o, src, "optimizer");
    orr.read("eps", cfg.optimizer.eps);
    if (orr.has("step_size")) cfg.optimizer.step_size = orr.require<double>("step_size");
    orr.read("iterations", cfg.optimizer.iterations);
    orr.finish();
    try {
      validate_optimizer_config(cfg.optimizer);
    } catch (const std::invalid_argument& e) {
      fail_at(src, o, std::string("optimizer: ") + e.what());
    }
  }
  if (const auto g = r.child("range")) {
    MapReader rr(g, src, "range");
    rr.read("K", cfg.range.K);
    rr.read("rho", cfg.range.rho);
    rr.read("window", cfg.range.window);
    rr.finish();
    try {
      validate_range_config(cfg.range);
    } catch (const std::invalid_argument& e) {
      fail_at(src, g, std::string("range: ") + e.what());
    }
  }
  if (const auto j = r.child("judge")) {
    MapReader jr(j, src, "judge");
    jr.read("threshold", cfg.judge.threshold);
    jr.finish();
    try {
      validate_judge(cfg.judge);
    } catch (const std::invalid_argument& e) {
      fail_at(src, j, std::string("judge: ") + e.what());
    }
  }
  if (const auto d = r.child("defense")) {
    MapReader dr(d, src, "defense");
    dr.read("similarity_threshold", cfg.defense.similarity_threshold);
    if (const auto grid = dr.child("grid")) {
      const auto g = list_of<std::size_t>(grid, src, "defense.grid");
      check(g.size() == 2, src, grid, "defense.grid: expected [h, w]");
      cfg.defense.grid_h = g[0];
      cfg.defense.grid_w = g[1];
    }
    dr.read("history_capacity", cfg.defense.history_capacity);
    dr.finish();
    try {
      validate_defense_config(cfg.defense);
    } catch (const std::invalid_argument& e) {
      fail_at(src, d, std::string("defense: ") + e.what());
    }
  }

  const YAML::Node seeds = r.child("seeds");
  if (!seeds) fail_at(src, doc, "missing required key 'seeds'");
  if (seeds.IsMap()) {
    MapReader sr(seeds, src, "seeds");
    const auto start = sr.require<std::uint64_t>("start");
    const auto count = sr.require<std::size_t>("count");
    sr.finish();
    for (std::size_t i = 0; i < count; ++i) cfg.seeds.push_back(start + i);
  } else {
    cfg.seeds = list_of<std::uint64_t>(seeds, src, "seeds");
  }
  check(!cfg.seeds.empty(), src, seeds, "seeds: need at least one seed");

  r.read("output_dir", cfg.output_dir);
  r.read("workers", cfg.workers);
  r.read("image_requests_in_flight", cfg.image_requests_in_flight);
  check(cfg.image_requests_in_flight >= 1 && cfg.image_requests_in_flight <= 64, src, doc,
        "image_requests_in_flight must be in [1, 64]");
  r.read("save_trajectories", cfg.save_trajectories);
  r.read("save_candidate_images", cfg.save_candidate_images);

  if (const auto a = r.child("ablation")) {
    MapReader ar(a, src, "ablation");
    if (const auto rv = ar.child("rho_values")) {
      cfg.ablation.rho_values = list_of<std::size_t>(rv, src, "ablation.rho_values");
      check(!cfg.ablation.rho_values.empty(), src, rv, "ablation.rho_values: must not be empty");
      for (std::size_t i = 0; i < cfg.ablation.rho_values.size(); ++i) {
        check(cfg.ablation.rho_values[i] >= 1 &&
                  (i == 0 || cfg.ablation.rho_values[i] > cfg.ablation.rho_values[i - 1]),
              src, rv, "ablation.rho_values: must be increasing and >= 1");
      }
    }
    ar.read("max_images", cfg.ablation.max_images);
    check(cfg.ablation.max_images >= 1, src, a, "ablation.max_images must be >= 1");
    if (const auto ii = ar.child("initial_images")) {
      cfg.ablation.initial_images = providers_from(ii, src, "ablation.initial_images");
    }
    if (const auto cs = ar.child("count_suites")) {
      if (!cs.IsMap() || cs.size() == 0) fail_at(src, cs, "ablation.count_suites: expected {name: sharpness}");
      cfg.ablation.count_suites.clear();
      for (const auto& kv : cs) {
        const auto s = scalar_as<double>(kv.second, src, "ablation.count_suites");
        check(s > 0.0, src, kv.second, "ablation.count_suites: sharpness must be > 0");
        cfg.ablation.count_suites.emplace_back(kv.first.as<std::string>(), s);
      }
    }
    ar.finish();
  }
  cfg.transfer_sources = cfg.scenarios;
  cfg.transfer_targets = cfg.scenarios;
  if (const auto t = r.child("transfer")) {
    MapReader tr(t, src, "transfer");
    if (const auto s = tr.child("sources")) cfg.transfer_sources = categories_from(s, src, "transfer.sources");
    if (const auto s = tr.child("targets")) cfg.transfer_targets = categories_from(s, src, "transfer.targets");
    tr.finish();
    check(!cfg.transfer_sources.empty() && !cfg.transfer_targets.empty(), src, t,
          "transfer: sources and targets must be non-empty");
  }
  r.finish();

  const std::size_t vocab =
      cfg.model.kind == ModelKind::ToyVlm ? cfg.model.toy.vocab_size : std::size_t{2};
  for (const auto& e : cfg.corpus) {
    for (std::size_t t : e) {
      check(t < vocab, src, doc["corpus"], "corpus: token " + std::to_string(t) +
                                               " outside the model vocabulary");
    }
  }
  if (cfg.model.kind == ModelKind::SyntheticLandscape) {
    cfg.model.landscape.eps = cfg.optimizer.eps;
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, 0, 0, "cannot open configuration file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str(), path);
}

}  // namespace mlai
