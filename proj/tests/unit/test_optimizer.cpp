#include <doctest.h>

#include <cmath>
#include <limits>

#include "mlai/harness/cells.hpp"
#include "mlai/optimizer/pgd.hpp"
#include "support.hpp"

using namespace mlai;

namespace {

/// Linear loss -sum(x) that turns NaN once the mean pixel passes `limit`.
class PoisonedModel final : public TargetModel {
 public:
  explicit PoisonedModel(double limit) : limit_(limit) {}
  ModelKind kind() const override { return ModelKind::SyntheticLandscape; }
  std::size_t vocab_size() const override { return 2; }
  Shape input_shape() const override { return {2, 2, 1}; }
  const EmbeddingSet& scenario_embeddings() const override { return emb_; }

 protected:
  double do_loss(const Image& x, std::span<const Instruction>, const TargetCorpus&) const override {
    double s = 0.0;
    for (double v : x.data()) s += v;
    if (s / static_cast<double>(x.size()) > limit_) return std::numeric_limits<double>::quiet_NaN();
    return -s;
  }
  LossAndGrad do_loss_and_grad(const Image& x, std::span<const Instruction> b,
                               const TargetCorpus& c) const override {
    Gradient g{x.shape(), std::vector<double>(x.size(), -1.0)};
    return {do_loss(x, b, c), g};
  }
  Response do_respond(const Image&, const Instruction&) const override { return {{0}, 0.0}; }

 private:
  double limit_;
  EmbeddingSet emb_ = make_embeddings(EmbeddingSpec{});
};

std::vector<Candidate> with_losses(const std::vector<double>& losses) {
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    out.push_back({i, losses[i], new_image(1, 1, 1, 0.5)});
  }
  return out;
}

}  // namespace

TEST_CASE("optimizer config validation") {
  OptimizerConfig cfg;
  CHECK(cfg.alpha() == doctest::Approx(32.0 / 2550.0));
  CHECK_NOTHROW(validate_optimizer_config(cfg));
  cfg.iterations = 0;
  CHECK_THROWS_AS(validate_optimizer_config(cfg), std::invalid_argument);
  cfg = {};
  cfg.step_size = cfg.eps * 1.5;
  CHECK_THROWS_AS(validate_optimizer_config(cfg), std::invalid_argument);
  cfg.step_size = 0.0;
  CHECK_THROWS_AS(validate_optimizer_config(cfg), std::invalid_argument);
  cfg = {};
  cfg.eps = 0.0;
  CHECK_THROWS_AS(validate_optimizer_config(cfg), std::invalid_argument);
  cfg.eps = 1.5;
  CHECK_THROWS_AS(validate_optimizer_config(cfg), std::invalid_argument);
  cfg.eps = 1.0;
  CHECK_NOTHROW(validate_optimizer_config(cfg));
}

TEST_CASE("argmin_loss") {
  CHECK(argmin_loss(with_losses({5, 4, 3, 2, 1})) == 4);
  CHECK(argmin_loss(with_losses({5, 4, 3, 1, 2, 3, 4, 1, 9})) == 3);
  CHECK(argmin_loss(with_losses({2})) == 0);
  CHECK_THROWS_AS(argmin_loss({}), std::invalid_argument);
}

TEST_CASE("pgd reaches a minimum inside the ball") {
  const Image init = new_image(2, 2, 1, 0.5);
  const Image center = test::image_from({2, 2, 1}, {0.55, 0.47, 0.5, 0.6});
  const auto model = test::quadratic(center, 1.0, 0.125);
  const auto batch = test::instructions(Category::IA, 1);
  OptimizerConfig cfg;
  cfg.iterations = 50;
  const Trajectory t = run_pgd(*model, init, batch, default_corpus(2), cfg);
  CHECK(t.size() == 50);
  CHECK(best_candidate(t).loss - 0.125 < 1e-3);
  CHECK(best_candidate(t).loss >= 0.125);
  CHECK(check_trajectory_constraints(t).empty());
}

TEST_CASE("pgd stops at the ball face when the minimum lies outside") {
  const double eps = 32.0 / 255.0;
  const Image init = new_image(2, 2, 1, 0.5);
  const Image center =
      test::image_from({2, 2, 1}, {0.5 + 2 * eps, 0.5 - 2 * eps, 0.5 + 2 * eps, 0.5});
  const auto model = test::quadratic(center, 2.0);
  OptimizerConfig cfg;
  cfg.iterations = 30;
  const Trajectory t = run_pgd(*model, init, test::instructions(Category::IA, 1),
                               default_corpus(2), cfg);
  for (const auto& c : t.candidates) CHECK(linf_distance(c.image, init) <= eps + 1e-12);
  // Constrained optimum: every displaced pixel pinned at the face, distance eps each.
  CHECK(best_candidate(t).loss == doctest::Approx(2.0 * 3 * eps * eps).epsilon(1e-9));
}

TEST_CASE("trajectory bookkeeping") {
  const ToyVlm m(Seed{5}, ToyVlmConfig{});
  const auto batch = test::instructions(Category::PL, 2);
  OptimizerConfig cfg;
  cfg.iterations = 25;
  const Image init = seeded_noise(Seed{6}, 8, 8, 3);
  const Trajectory t = run_pgd(m, init, batch, default_corpus(8), cfg);
  REQUIRE(t.size() == 25);
  CHECK(t.initial_image == init);
  double running = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(t.candidates[i].iteration == i);
    CHECK(std::isfinite(t.candidates[i].loss));
    CHECK(t.candidates[i].loss == m.loss(t.candidates[i].image, batch, default_corpus(8)));
    const double next = std::min(running, t.candidates[i].loss);
    CHECK(next <= running);
    running = next;
  }
  CHECK(t.min_index == argmin_loss(t.candidates));
  CHECK(best_candidate(t).loss == running);
  CHECK(check_trajectory_constraints(t).empty());

  // Same inputs, same trajectory.
  const Trajectory again = run_pgd(m, init, batch, default_corpus(8), cfg);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(again.candidates[i].image == t.candidates[i].image);
}

TEST_CASE("pgd rejects mismatched inputs") {
  const ToyVlm m(Seed{5}, ToyVlmConfig{});
  CHECK_THROWS_AS(run_pgd(m, new_image(4, 4, 3, 0.5), test::instructions(Category::IA, 1),
                          default_corpus(8), OptimizerConfig{}),
                  std::invalid_argument);
  OptimizerConfig bad;
  bad.iterations = 0;
  CHECK_THROWS_AS(run_pgd(m, new_image(8, 8, 3, 0.5), test::instructions(Category::IA, 1),
                          default_corpus(8), bad),
                  std::invalid_argument);
}

TEST_CASE("non-finite loss aborts with the partial trajectory") {
  const PoisonedModel m(0.5 + 0.045);
  OptimizerConfig cfg;
  cfg.iterations = 20;
  try {
    run_pgd(m, new_image(2, 2, 1, 0.5), test::instructions(Category::IA, 1), default_corpus(1), cfg);
    FAIL("expected AbortedRun");
  } catch (const AbortedRun& e) {
    const Trajectory& p = e.partial();
    // Steps of eps/10 ~ 0.01255: three stay below the limit, the fourth crosses it.
    CHECK(p.size() == 3);
    for (const auto& c : p.candidates) CHECK(std::isfinite(c.loss));
    CHECK(p.min_index == 2);
  }
}

TEST_CASE("constraint checker flags violations") {
  Trajectory t{new_image(1, 1, 1, 0.5), OptimizerConfig{}, {}, 0};
  t.candidates.push_back({0, 0.0, new_image(1, 1, 1, 0.5 + 32.0 / 255.0)});
  CHECK(check_trajectory_constraints(t).empty());
  t.candidates.push_back({1, 0.0, new_image(1, 1, 1, 0.5 + 33.0 / 255.0)});
  CHECK(!check_trajectory_constraints(t).empty());
}
