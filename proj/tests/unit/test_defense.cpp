#include <doctest.h>

#include <json.hpp>
#include <sstream>

#include "mlai/defense/defense.hpp"
#include "support.hpp"

using namespace mlai;

namespace {

/// 8x8 gray image lit only in block row `r` of an 8x8 grid.
Image lit_row(std::size_t r, double v = 0.9) {
  std::vector<double> data(64, 0.0);
  for (std::size_t x = 0; x < 8; ++x) data[r * 8 + x] = v;
  return Image({8, 8, 1}, std::move(data));
}

}  // namespace

TEST_CASE("defense config validation") {
  CHECK_NOTHROW(validate_defense_config(DefenseConfig{}));
  CHECK_NOTHROW(validate_defense_config(DefenseConfig{0.0, 8, 8, 4}));
  CHECK_NOTHROW(validate_defense_config(DefenseConfig{1.0, 8, 8, 4}));
  CHECK_THROWS_AS(validate_defense_config(DefenseConfig{1.5, 8, 8, 4}), std::invalid_argument);
  CHECK_THROWS_AS(validate_defense_config(DefenseConfig{-0.1, 8, 8, 4}), std::invalid_argument);
  CHECK_THROWS_AS(validate_defense_config(DefenseConfig{0.9, 0, 8, 4}), std::invalid_argument);
  CHECK_THROWS_AS(validate_defense_config(DefenseConfig{0.9, 8, 8, 0}), std::invalid_argument);
  CHECK_THROWS_AS(FingerprintHistory(0), std::invalid_argument);
}

TEST_CASE("history evicts oldest first") {
  FingerprintHistory h(3);
  for (int i = 0; i < 5; ++i) h.push(FeatureVector({static_cast<double>(i)}));
  CHECK(h.size() == 3);
  CHECK(h.entries().front()[0] == 2.0);
  CHECK(h.entries().back()[0] == 4.0);
}

TEST_CASE("identical pair: first admitted, second rejected") {
  FingerprintHistory h(16);
  const Image a = seeded_noise(Seed{1}, 8, 8, 3);
  const std::vector<Image> batch = {a, a};
  const FilterResult r = filter_batch(h, batch, DefenseConfig{});
  CHECK(r.admitted_indices == std::vector<std::size_t>{0});
  CHECK(r.rejected_count == 1);
  CHECK(r.rejected_by_batch == 1);
  CHECK(r.rejected_by_history == 0);
  REQUIRE(r.max_similarity.has_value());
  CHECK(*r.max_similarity == doctest::Approx(1.0));
  CHECK(h.size() == 1);

  // The same image in a later batch is caught by the history.
  const std::vector<Image> again = {a};
  const FilterResult r2 = filter_batch(h, again, DefenseConfig{});
  CHECK(r2.admitted_indices.empty());
  CHECK(r2.rejected_by_history == 1);
}

TEST_CASE("orthogonal fingerprints are all admitted") {
  FingerprintHistory h(16);
  std::vector<Image> batch;
  for (std::size_t r = 0; r < 8; ++r) batch.push_back(lit_row(r));
  const FilterResult res = filter_batch(h, batch, DefenseConfig{});
  CHECK(res.admitted_indices.size() == 8);
  CHECK(res.rejected_count == 0);
  CHECK(*res.max_similarity == 0.0);
  CHECK(h.size() == 8);
}

TEST_CASE("single image with empty history makes no comparison") {
  FingerprintHistory h(4);
  const std::vector<Image> batch = {lit_row(0)};
  const FilterResult r = filter_batch(h, batch, DefenseConfig{});
  CHECK(r.admitted_indices.size() == 1);
  CHECK(!r.max_similarity.has_value());
  FingerprintHistory h2(4);
  CHECK(filter_batch(h2, std::span<const Image>{}, DefenseConfig{}).admitted_indices.empty());
}

TEST_CASE("threshold zero keeps only the first image") {
  FingerprintHistory h(16);
  std::vector<Image> batch;
  for (std::size_t r = 0; r < 5; ++r) batch.push_back(lit_row(r));
  const FilterResult res = filter_batch(h, batch, DefenseConfig{0.0, 8, 8, 16});
  CHECK(res.admitted_indices == std::vector<std::size_t>{0});
  CHECK(res.rejected_count == 4);
}

TEST_CASE("first image of a non-empty batch is admitted by a fresh history") {
  SplitMix64 rng(Seed{5});
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Image> batch;
    const std::size_t n = 1 + rng.below(10);
    for (std::size_t i = 0; i < n; ++i) batch.push_back(seeded_noise(Seed{rng.next()}, 8, 8, 3));
    FingerprintHistory h(1024);
    const FilterResult r = filter_batch(h, batch, DefenseConfig{rng.uniform(), 8, 8, 1024});
    REQUIRE(!r.admitted_indices.empty());
    CHECK(r.admitted_indices.front() == 0);
    CHECK(r.admitted_indices.size() + r.rejected_count == n);
    CHECK(r.rejected_by_batch + r.rejected_by_history == r.rejected_count);
  }
}

TEST_CASE("defended attack never beats the undefended one") {
  const test::PixelHarmModel m({8, 8, 1});
  const auto instrs = test::instructions(Category::IA, 3);
  SplitMix64 rng(Seed{11});
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Image> imgs;
    const std::size_t n = 1 + rng.below(8);
    for (std::size_t i = 0; i < n; ++i) {
      const Image base = lit_row(rng.below(8), 0.2 + 0.6 * rng.uniform());
      imgs.push_back(base);
    }
    const DefendedResult d =
        defended_attack(m, test::set_of(imgs), instrs, Judge{}, DefenseConfig{});
    CHECK(d.defended_asr <= d.undefended_asr);
    CHECK(d.reduction >= 0.0);
    CHECK(d.reduction == doctest::Approx(d.undefended_asr - d.defended_asr));
    CHECK(d.set_size == n);
    CHECK(d.admitted >= 1);
    CHECK(d.admitted == d.filter.admitted_indices.size());
    CHECK(d.undefended.size() == instrs.size());
  }
}

TEST_CASE("near-duplicate winner is filtered out") {
  // Two nearly identical images; only the second one is harmful.
  const test::PixelHarmModel m({8, 8, 1});
  std::vector<double> a(64, 0.3), b(64, 0.3);
  a[0] = 0.2;
  b[0] = 0.8;
  const auto instrs = test::instructions(Category::IA, 2);
  const DefendedResult d = defended_attack(
      m, test::set_of({Image({8, 8, 1}, a), Image({8, 8, 1}, b)}), instrs, Judge{}, DefenseConfig{});
  CHECK(d.undefended_asr == 1.0);
  CHECK(d.defended_asr == 0.0);
  CHECK(d.reduction == 1.0);
}

TEST_CASE("defense event log line") {
  FilterResult r;
  r.admitted_indices = {0, 2};
  r.rejected_count = 1;
  r.rejected_by_batch = 1;
  r.max_similarity = 0.97;
  std::ostringstream out;
  write_defense_event(out, "IA_matched_s1", r);
  const std::string line = out.str();
  CHECK(line.back() == '\n');
  const auto j = nlohmann::json::parse(line);
  CHECK(j["batch_id"] == "IA_matched_s1");
  CHECK(j["admitted"] == 2);
  CHECK(j["rejected"] == 1);
  CHECK(j["rejected_by_batch"] == 1);
  CHECK(j["rejected_by_history"] == 0);
  CHECK(j["max_similarity"].get<double>() == 0.97);

  std::ostringstream none;
  write_defense_event(none, "x", FilterResult{{0}, 0, 0, 0, std::nullopt});
  CHECK(nlohmann::json::parse(none.str())["max_similarity"].is_null());
}
