#include <doctest.h>

#include <atomic>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <mutex>
#include <sstream>

#include "mlai/harness/cells.hpp"
#include "mlai/harness/commands.hpp"
#include "mlai/harness/config.hpp"
#include "mlai/harness/experiments.hpp"
#include "mlai/harness/manifest.hpp"
#include "mlai/harness/suite.hpp"
#include "mlai/lossrange/trajectory_io.hpp"
#include "mlai/scenario/taxonomy.hpp"
#include "support.hpp"

using namespace mlai;

namespace {

std::shared_ptr<const Taxonomy> taxonomy() {
  static const auto t = std::make_shared<const Taxonomy>(Taxonomy::load(test::source_dir() / "data"));
  return t;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::filesystem::path write_config(const std::string& name, const std::string& text) {
  const auto dir = test::scratch_dir("cfg_" + name);
  const auto path = dir / "config.yaml";
  std::ofstream(path) << text;
  return path;
}

const char* kSmallToy = R"(schema_version: 1
model:
  kind: toy-vlm
  seed: 7
scenarios: [IA, FR]
instructions_per_scenario: 4
optimizer:
  iterations: 12
seeds: [1, 2]
workers: 2
)";

/// Always-NaN training model: every PGD run aborts on its first step.
class NanModel final : public TargetModel {
 public:
  ModelKind kind() const override { return ModelKind::ToyVlm; }
  std::size_t vocab_size() const override { return 32; }
  Shape input_shape() const override { return {8, 8, 3}; }
  const EmbeddingSet& scenario_embeddings() const override { return emb_; }

 protected:
  double do_loss(const Image&, std::span<const Instruction>, const TargetCorpus&) const override {
    return std::numeric_limits<double>::quiet_NaN();
  }
  LossAndGrad do_loss_and_grad(const Image& x, std::span<const Instruction>,
                               const TargetCorpus&) const override {
    return {std::numeric_limits<double>::quiet_NaN(), Gradient::zeros(x.shape())};
  }
  Response do_respond(const Image&, const Instruction&) const override { return {{0}, 0.0}; }

 private:
  EmbeddingSet emb_ = make_embeddings(EmbeddingSpec{});
};

}  // namespace

TEST_CASE("bundled configs parse") {
  for (const char* name : {"attack", "ablate_initial_image", "ablate_image_count", "ablate_rho",
                           "transfer", "defend"}) {
    CAPTURE(name);
    const auto path = test::source_dir() / "configs" / (std::string(name) + ".yaml");
    CHECK_NOTHROW(load_experiment_config(path.string()));
  }
  const ExperimentConfig c =
      load_experiment_config((test::source_dir() / "configs" / "attack.yaml").string());
  CHECK(c.scenarios.size() == 13);
  CHECK(c.seeds == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
  CHECK(c.range.rho == 6);
  CHECK(c.optimizer.eps == 32.0 / 255.0);
}

TEST_CASE("experiment config values") {
  const ExperimentConfig c = parse_experiment_config(R"(schema_version: 1
model: {kind: synthetic-landscape, landscape: {sharpness: 5}}
scenarios: [PO]
providers: [blank, matched]
corpus: [[0, 1], [1]]
optimizer: {eps: 0.1, step_size: 0.02, iterations: 9}
range: {K: 2.0, rho: 3, window: 7}
judge: {threshold: 0.6}
defense: {similarity_threshold: 0.9, grid: [4, 4], history_capacity: 8}
seeds: {start: 10, count: 3}
ablation: {rho_values: [1, 3], max_images: 5, count_suites: {a: 10, b: 2}}
transfer: {sources: [IA], targets: [MG, PO]}
)");
  CHECK(c.model.kind == ModelKind::SyntheticLandscape);
  CHECK(c.model.landscape.eps == 0.1);
  CHECK(c.scenarios == std::vector<Category>{Category::PO});
  CHECK(c.providers.size() == 2);
  CHECK(c.corpus.size() == 2);
  CHECK(c.optimizer.alpha() == 0.02);
  CHECK(c.range.K == 2.0);
  CHECK(c.judge.threshold == 0.6);
  CHECK(c.defense.grid_h == 4);
  CHECK(c.seeds == std::vector<std::uint64_t>{10, 11, 12});
  CHECK(c.ablation.count_suites.size() == 2);
  CHECK(c.transfer_targets.size() == 2);
}

TEST_CASE("experiment config errors carry line numbers") {
  struct Case {
    std::string text;
    int line;
  };
  const std::vector<Case> cases = {
      {"schema_version: 1\nmodel: {kind: toy-vlm}\nscenarios: all\nseeds: [1]\nbogus: 3\n", 5},
      {"schema_version: 1\nmodel: {kind: toy-vlm}\nscenarios: [IA, ZZ]\nseeds: [1]\n", 3},
      {"schema_version: 1\nmodel: {kind: toy-vlm}\nscenarios: all\nseeds: [1]\noptimizer:\n  "
       "iterations: 0\n",
       6},
      {"schema_version: 1\nmodel: {kind: toy-vlm}\nscenarios: all\nseeds: [1]\nrange: {rho: "
       "abc}\n",
       5},
      {"schema_version: 2\nmodel: {kind: toy-vlm}\nscenarios: all\nseeds: [1]\n", 1},
  };
  for (const auto& c : cases) {
    CAPTURE(c.text);
    try {
      parse_experiment_config(c.text, "x.yaml");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.line() == c.line);
    }
  }
  // Missing required keys.
  CHECK_THROWS_AS(parse_experiment_config("schema_version: 1\nmodel: {kind: toy-vlm}\nseeds: [1]\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment_config("schema_version: 1\nmodel: {kind: toy-vlm}\nscenarios: all\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(
                      "schema_version: 1\nmodel: {kind: toy-vlm}\nscenarios: []\nseeds: [1]\n"),
                  ConfigError);
  CHECK_THROWS_AS(load_experiment_config("/nonexistent.yaml"), ConfigError);
}

TEST_CASE("sha256 and atomic writes") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const auto dir = test::scratch_dir("atomic");
  write_text_atomic(dir / "a.txt", "hello");
  write_text_atomic(dir / "a.txt", "abc");
  CHECK(read_text(dir / "a.txt") == "abc");
  CHECK(!std::filesystem::exists(dir / "a.txt.tmp"));
  CHECK(file_sha256(dir / "a.txt") == sha256_hex("abc"));
}

TEST_CASE("parallel_map keeps index order and rethrows") {
  const auto out = parallel_map<int>(100, 4, [](std::size_t i) { return static_cast<int>(i * i); });
  for (std::size_t i = 0; i < 100; ++i) CHECK(out[i] == static_cast<int>(i * i));
  CHECK(parallel_map<int>(0, 4, [](std::size_t) { return 1; }).empty());
  CHECK_THROWS_WITH(parallel_map<int>(10, 3,
                                      [](std::size_t i) -> int {
                                        if (i == 7) throw std::runtime_error("seven");
                                        if (i == 9) throw std::runtime_error("nine");
                                        return 0;
                                      }),
                    "seven");
  CHECK(resolve_workers(3) == 3);
  CHECK(resolve_workers(0) >= 1);
}

TEST_CASE("lab cells are deterministic and observed") {
  const ExperimentConfig cfg = parse_experiment_config(kSmallToy);
  std::mutex mu;
  std::size_t seen = 0;
  std::string violation;
  LabOptions opts;
  opts.observer = [&](const CellSpec&, const Trajectory& t) {
    std::lock_guard lock(mu);
    ++seen;
    const auto v = check_trajectory_constraints(t);
    if (!v.empty()) violation = v;
  };
  const auto lab = make_lab(cfg, taxonomy(), opts);
  const auto cells = lab->cells();
  REQUIRE(cells.size() == 4);
  CHECK(cells[0].label() == "IA_matched_s1");
  CHECK(cells[3].label() == "FR_matched_s2");
  CHECK(lab->instructions_for(Category::FR).size() == 4);

  const PreparedCell a = lab->prepare(cells[1]);
  const PreparedCell b = lab->prepare(cells[1]);
  CHECK(a.init == b.init);
  CHECK(a.models.train->loss(a.init, a.instructions, lab->corpus()) ==
        b.models.train->loss(b.init, b.instructions, lab->corpus()));

  std::vector<CellOutput<CellRecord>> recs;
  const EvalReport r1 = evaluate_suite(*lab, cells, &recs);
  const EvalReport r2 = evaluate_suite(*lab, cells);
  CHECK(seen == 8);
  CHECK(violation.empty());
  CHECK(eval_report_csv(r1) == eval_report_csv(r2));
  REQUIRE(r1.rows.size() == 2);
  CHECK(r1.rows[0].runs == 2);
  CHECK(r1.rows[0].multi_loss.n == 8);
  for (const auto& rec : recs) {
    REQUIRE(rec.value.has_value());
    CHECK(rec.value->losses.size() == 12);
    CHECK(rec.value->footer.selected_iterations.size() >= 1);
  }
}

TEST_CASE("aborted runs become exclusions") {
  const ExperimentConfig cfg = parse_experiment_config(kSmallToy);
  LabOptions opts;
  std::atomic<int> observed{0};
  opts.observer = [&](const CellSpec&, const Trajectory& t) {
    if (t.candidates.empty()) ++observed;
  };
  opts.factory = [](const CellSpec& spec, const Image&) {
    if (spec.scenario == Category::IA && spec.seed == 2) {
      auto m = std::make_shared<const NanModel>();
      return CellModels{m, m};
    }
    auto m = make_toy_vlm(Seed{spec.seed}, ToyVlmConfig{});
    return CellModels{m, m};
  };
  const auto lab = make_lab(cfg, taxonomy(), opts);
  std::vector<CellOutput<CellRecord>> recs;
  const EvalReport rep = evaluate_suite(*lab, lab->cells(), &recs);
  CHECK(observed == 1);
  CHECK(rep.rows[0].excluded == 1);
  CHECK(rep.rows[0].runs == 2);
  CHECK(rep.rows[0].multi_loss.n == 4);
  CHECK(rep.rows[1].excluded == 0);
  CHECK(!recs[1].value.has_value());
  CHECK(!recs[1].abort_reason.empty());
}

TEST_CASE("cmd_attack writes artifacts and a manifest") {
  const auto cfg_path = write_config("attack", kSmallToy);
  const auto out = test::scratch_dir("attack_out");
  CommandOptions opts;
  opts.config_path = cfg_path.string();
  opts.out_dir = out.string();
  opts.save_candidate_images = true;
  std::ostringstream log, err;
  REQUIRE(cmd_attack(opts, log, err) == kExitOk);
  CHECK(err.str().empty());

  const auto csv = read_text(out / "eval.csv");
  CHECK(csv.rfind("scenario,provider,runs,excluded,n,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(std::filesystem::exists(out / "eval.json"));
  const auto rec = load_trajectory_jsonl(out / "trajectories" / "IA_matched_s1.jsonl");
  CHECK(rec.losses.size() == 12);
  CHECK(rec.footer.has_value());

  const auto manifest = nlohmann::json::parse(read_text(out / "manifest.json"));
  CHECK(manifest["command"] == "attack");
  CHECK(manifest["config_sha256"] == file_sha256(cfg_path));
  CHECK(manifest["tool_version"] == tool_version());
  CHECK(!manifest["artifacts"].empty());
  for (const auto& a : manifest["artifacts"]) {
    CHECK(std::filesystem::exists(out / a.get<std::string>()));
  }
  bool saw_image = false;
  for (const auto& a : manifest["artifacts"]) {
    saw_image = saw_image || a.get<std::string>().find(".mimg") != std::string::npos;
  }
  CHECK(saw_image);
}

TEST_CASE("command exit codes") {
  std::ostringstream log, err;
  CommandOptions missing;
  missing.config_path = "/nonexistent/config.yaml";
  CHECK(cmd_attack(missing, log, err) == kExitConfig);
  CHECK(cmd_defend(missing, log, err) == kExitConfig);

  CommandOptions bad;
  bad.config_path = write_config("bad", "schema_version: 1\nscenarios: all\nseeds: [1]\nmodle: 1\n")
                        .string();
  CHECK(cmd_attack(bad, log, err) == kExitConfig);
  CHECK(err.str().find("config.yaml:4:1: unknown key 'modle'") != std::string::npos);

  CommandOptions which;
  which.config_path = write_config("which", kSmallToy).string();
  which.out_dir = test::scratch_dir("which_out").string();
  which.which = "colour";
  CHECK(cmd_ablate(which, log, err) == kExitConfig);

  // Output directory blocked by a regular file.
  const auto blocker = test::scratch_dir("blocked") / "file";
  std::ofstream(blocker) << "x";
  CommandOptions blocked;
  blocked.config_path = which.config_path;
  blocked.out_dir = (blocker / "sub").string();
  CHECK(cmd_attack(blocked, log, err) == kExitRuntime);
}

TEST_CASE("ablation and experiment commands run end to end") {
  const auto cfg_path = write_config("ablate", std::string(kSmallToy) +
                                                   "ablation:\n  rho_values: [1, 2, 6]\n"
                                                   "  max_images: 4\n");
  std::ostringstream log, err;
  for (const char* which : {"initial-image", "image-count", "rho"}) {
    CAPTURE(which);
    CommandOptions opts;
    opts.config_path = cfg_path.string();
    opts.out_dir = test::scratch_dir(std::string("abl_") + which).string();
    opts.which = which;
    CHECK(cmd_ablate(opts, log, err) == kExitOk);
    CHECK(std::filesystem::exists(std::filesystem::path(*opts.out_dir) / "manifest.json"));
  }
  CommandOptions tr;
  tr.config_path = cfg_path.string();
  tr.out_dir = test::scratch_dir("transfer_out").string();
  CHECK(cmd_transfer(tr, log, err) == kExitOk);
  const auto matrix = read_text(std::filesystem::path(*tr.out_dir) / "transfer_matrix.csv");
  CHECK(matrix.find("\nIA,") != std::string::npos);
  CHECK(matrix.find("NA") != std::string::npos);  // only IA and FR were run

  CommandOptions df;
  df.config_path = cfg_path.string();
  df.out_dir = test::scratch_dir("defend_out").string();
  CHECK(cmd_defend(df, log, err) == kExitOk);
  const auto events = read_text(std::filesystem::path(*df.out_dir) / "defense_events.jsonl");
  CHECK(std::count(events.begin(), events.end(), '\n') == 4);
  CHECK(err.str().empty());
}

TEST_CASE("rho sweep and count curves are monotone") {
  ExperimentConfig cfg = parse_experiment_config(kSmallToy);
  cfg.ablation.rho_values = {1, 2, 3, 4, 5, 6};
  const RhoSweep sweep = ablate_rho(cfg, taxonomy());
  REQUIRE(sweep.points.size() == 6);
  for (std::size_t i = 1; i < sweep.points.size(); ++i) {
    CHECK(sweep.points[i].multi_loss.successes >= sweep.points[i - 1].multi_loss.successes);
    CHECK(sweep.points[i].mean_set_size >= sweep.points[i - 1].mean_set_size);
  }
  CHECK(sweep.knee >= 1);
  CHECK(sweep.knee <= 6);

  cfg.ablation.max_images = 6;
  const auto curves = ablate_image_count(cfg, taxonomy());
  REQUIRE(curves.size() == 1);
  CHECK(curves[0].suite == "model");
  REQUIRE(curves[0].by_count.size() == 6);
  for (std::size_t i = 1; i < 6; ++i)
    CHECK(curves[0].by_count[i].successes >= curves[0].by_count[i - 1].successes);
}
