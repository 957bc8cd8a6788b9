#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <fstream>
#include <json.hpp>
#include <thread>

#include "mlai/models/model_config.hpp"
#include "mlai/scenario/image_client.hpp"
#include "mlai/scenario/prompts.hpp"
#include "mlai/scenario/providers.hpp"
#include "mlai/scenario/taxonomy.hpp"
#include "mlai/scenario/transfer.hpp"
#include "mlai/tensor/image_io.hpp"
#include "support.hpp"

using namespace mlai;

namespace {

const Taxonomy& bundled() {
  static const Taxonomy t = Taxonomy::load(test::source_dir() / "data");
  return t;
}

/// Local image service: answers every POST with a PNG of the requested size.
class FakeImageServer {
 public:
  explicit FakeImageServer(int status = 200, std::chrono::milliseconds delay = {}) {
    server_.Post("/generate", [this, status, delay](const httplib::Request& req,
                                                     httplib::Response& res) {
      const int now = ++active_;
      int prev = max_active_.load();
      while (now > prev && !max_active_.compare_exchange_weak(prev, now)) {
      }
      std::this_thread::sleep_for(delay);
      last_auth_ = req.get_header_value("Authorization");
      const auto body = nlohmann::json::parse(req.body);
      last_prompt_ = body.at("prompt").get<std::string>();
      const auto w = body.at("width").get<std::size_t>();
      const auto h = body.at("height").get<std::size_t>();
      const auto png = encode_png(new_image(h, w, 3, 0.2));
      res.status = status;
      res.set_content(std::string(png.begin(), png.end()), "image/png");
      --active_;
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeImageServer() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/generate"; }
  int max_active() const { return max_active_.load(); }
  std::string last_auth() const { return last_auth_; }
  std::string last_prompt() const { return last_prompt_; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> active_{0};
  std::atomic<int> max_active_{0};
  std::string last_auth_;
  std::string last_prompt_;
};

std::filesystem::path copy_data(const std::string& name) {
  const auto dir = test::scratch_dir(name);
  for (const auto& e : std::filesystem::directory_iterator(test::source_dir() / "data")) {
    std::filesystem::copy(e.path(), dir / e.path().filename());
  }
  return dir;
}

}  // namespace

TEST_CASE("bundled taxonomy has the 13 scenarios") {
  const Taxonomy& t = bundled();
  CHECK(t.category(Category::IA).name == "Illegal Activity");
  CHECK(t.category(Category::FR).name == "Fraud");
  for (Category c : kAllCategories) {
    CHECK(t.category(c).id == c);
    CHECK(!t.category(c).description.empty());
    CHECK(!t.keywords(c).empty());
    CHECK(!t.template_text(c).empty());
    CHECK(t.instructions(c).size() == 10);
    for (const auto& instr : t.instructions(c)) {
      CHECK(instr.category == c);
      CHECK(categorize(t, instr.text) == c);
    }
  }
}

TEST_CASE("categorize") {
  const Taxonomy& t = bundled();
  std::string ia;
  for (const auto& k : t.keywords(Category::IA)) ia += k + " ";
  CHECK(categorize(t, ia) == Category::IA);
  CHECK(categorize(t, "Is this PHISHING email a scam?") == Category::FR);
  CHECK_THROWS_AS(categorize(t, ""), std::invalid_argument);
  CHECK_THROWS_AS(categorize(t, "a pleasant afternoon walk"), NoCategoryMatch);
  // Whole words only.
  CHECK_THROWS_AS(categorize(t, "illegally"), NoCategoryMatch);
  // One hit each: the alphabetically smaller code wins.
  CHECK(categorize(t, "illegal fraud") == Category::FR);
  CHECK(categorize(t, "illegal fraud scam") == Category::FR);
  CHECK(categorize(t, "illegal unlawful fraud") == Category::IA);
}

TEST_CASE("taxonomy load errors report positions") {
  const auto dir = copy_data("taxonomy_bad");
  {
    std::ofstream out(dir / "keywords.yaml");
    out << "schema_version: 1\nkeywords:\n  IA: [a]\n  QQ: [b]\n";
  }
  try {
    Taxonomy::load(dir);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 4);
  }
  CHECK_THROWS_AS(Taxonomy::load(test::scratch_dir("taxonomy_empty")), ConfigError);

  const auto dir2 = copy_data("taxonomy_mislabel");
  {
    std::ofstream out(dir2 / "instructions.yaml");
    out << "schema_version: 1\ninstructions:\n- id: X-1\n  category: IA\n  text: a phishing scam\n";
  }
  CHECK_THROWS_AS(Taxonomy::load(dir2), ConfigError);
}

TEST_CASE("build_prompt") {
  const Taxonomy& t = bundled();
  const Instruction fr{"FR-01", "a phishing scam", Category::FR};
  const ScenarioPrompt p = build_prompt(t, Category::FR, fr);
  CHECK(p.template_text.find("business") != std::string::npos);
  CHECK(p.instruction_ref == "FR-01");
  const ScenarioPrompt q = build_prompt(t, Category::FR, fr);
  CHECK(p.template_text == q.template_text);
  for (Category c : kAllCategories) {
    CHECK_NOTHROW(build_prompt(t, c, t.instructions(c)[0]));
  }

  auto templates = std::array<std::string, kCategoryCount>{};
  for (Category c : kAllCategories) templates[index_of(c)] = "scene for {code} ({name})";
  std::array<ScenarioCategory, kCategoryCount> cats;
  std::array<std::vector<std::string>, kCategoryCount> kws;
  for (Category c : kAllCategories) {
    cats[index_of(c)] = {c, std::string(to_code(c)) + " name", "d"};
    kws[index_of(c)] = {std::string(to_code(c))};
  }
  templates[index_of(Category::PH)] = "";
  templates[index_of(Category::HS)] = "a photo with a Rifle";
  const Taxonomy custom(cats, kws, templates, {"rifle"});
  CHECK(build_prompt(custom, Category::IA, fr).template_text == "scene for IA (IA name)");
  CHECK_THROWS_AS(build_prompt(custom, Category::PH, fr), std::invalid_argument);
  CHECK_THROWS_AS(build_prompt(custom, Category::HS, fr), DenyListViolation);
  CHECK_THROWS_AS(check_deny_list(custom, "two rifles? no: rifle"), DenyListViolation);
  CHECK_NOTHROW(check_deny_list(custom, "riflemen"));
}

TEST_CASE("offline providers") {
  const Taxonomy& t = bundled();
  const EmbeddingSet emb = make_embeddings(EmbeddingSpec{});
  const Shape shape{8, 8, 3};
  const auto prompt = build_prompt(t, Category::IA, t.instructions(Category::IA)[0]);
  const auto prompt_po = build_prompt(t, Category::PO, t.instructions(Category::PO)[0]);

  const Image blank = provide_image({ProviderKind::Blank, Seed{1}, nullptr}, prompt, shape, emb);
  CHECK(blank == new_image(8, 8, 3, 0.5));

  const ImageProvider irr{ProviderKind::Irrelevant, Seed{4}, nullptr};
  CHECK(provide_image(irr, prompt, shape, emb) == provide_image(irr, prompt, shape, emb));
  CHECK(provide_image(irr, prompt, shape, emb) == provide_image(irr, prompt_po, shape, emb));
  CHECK(!(provide_image(irr, prompt, shape, emb) ==
          provide_image({ProviderKind::Irrelevant, Seed{5}, nullptr}, prompt, shape, emb)));

  const ImageProvider matched{ProviderKind::Matched, Seed{1}, nullptr};
  const Image ia = provide_image(matched, prompt, shape, emb);
  CHECK(ia == provide_image(matched, prompt, shape, emb));
  const FeatureVector fp = downsample_gray(ia, emb.grid_h, emb.grid_w);
  CHECK(cosine_similarity(fp, emb[Category::IA]) >= 0.9);
  CHECK(cosine_similarity(fp, emb[Category::PO]) < 0.5);

  CHECK(parse_provider_kind("matched") == ProviderKind::Matched);
  CHECK(to_string(ProviderKind::External) == "external");
  CHECK_THROWS_AS(parse_provider_kind("dalle"), std::invalid_argument);
  CHECK_THROWS_AS(provide_image({ProviderKind::External, Seed{1}, nullptr}, prompt, shape, emb),
                  ProviderUnavailable);
}

TEST_CASE("external provider over a local http service") {
  FakeImageServer server;
  const Taxonomy& t = bundled();
  const EmbeddingSet emb = make_embeddings(EmbeddingSpec{});
  const auto prompt = build_prompt(t, Category::FR, t.instructions(Category::FR)[0]);
  auto client = std::make_shared<ImageClient>(server.endpoint(), "secret", 2, 5.0);
  const ImageProvider ext{ProviderKind::External, Seed{1}, client};
  const Image img = provide_image(ext, prompt, {8, 8, 3}, emb);
  CHECK(img.shape() == Shape{8, 8, 3});
  CHECK(std::abs(img[0] - 51.0 / 255.0) < 1e-12);
  CHECK(server.last_auth() == "Bearer secret");
  CHECK(server.last_prompt() == prompt.template_text);
}

TEST_CASE("image client limits requests in flight") {
  FakeImageServer server(200, std::chrono::milliseconds(60));
  const ImageClient client(server.endpoint(), "", 2, 5.0);
  std::vector<std::thread> threads;
  for (int i = 0; i < 6; ++i) {
    threads.emplace_back([&] { client.fetch_png("scene", 4, 4); });
  }
  for (auto& th : threads) th.join();
  CHECK(server.max_active() >= 1);
  CHECK(server.max_active() <= 2);
}

TEST_CASE("unavailable external provider") {
  const Taxonomy& t = bundled();
  const EmbeddingSet emb = make_embeddings(EmbeddingSpec{});
  const auto prompt = build_prompt(t, Category::IA, t.instructions(Category::IA)[0]);
  {
    FakeImageServer failing(503);
    auto client = std::make_shared<ImageClient>(failing.endpoint(), "", 1, 5.0);
    const ImageProvider ext{ProviderKind::External, Seed{1}, client};
    CHECK_THROWS_AS(provide_image(ext, prompt, {8, 8, 3}, emb), ProviderUnavailable);
    bool fell_back = false;
    const Image img = provide_image_or_matched(ext, prompt, {8, 8, 3}, emb, &fell_back);
    CHECK(fell_back);
    CHECK(img == provide_image({ProviderKind::Matched, Seed{1}, nullptr}, prompt, {8, 8, 3}, emb));
  }
  // Nothing listens on port 9 of the loopback interface.
  const ImageClient dead("http://127.0.0.1:9/x", "", 1, 0.5);
  CHECK_THROWS_AS(dead.fetch_png("scene", 4, 4), ProviderUnavailable);

  CHECK_THROWS_AS(ImageClient("https://example.org/x", ""), std::invalid_argument);
  CHECK_THROWS_AS(ImageClient("http://:80/x", ""), std::invalid_argument);
  CHECK_THROWS_AS(ImageClient("http://h/x", "", 0), std::invalid_argument);
}

TEST_CASE("image client from environment") {
  ::unsetenv("MLAI_IMAGE_ENDPOINT");
  CHECK(ImageClient::from_env() == nullptr);
  ::setenv("MLAI_IMAGE_ENDPOINT", "http://127.0.0.1:8080/gen", 1);
  const auto c = ImageClient::from_env(3);
  REQUIRE(c != nullptr);
  CHECK(c->endpoint() == "http://127.0.0.1:8080/gen");
  CHECK(c->max_in_flight() == 3);
  ::unsetenv("MLAI_IMAGE_ENDPOINT");
}

TEST_CASE("transfer matrix") {
  auto outcome = [](bool s) { return AttackOutcome{"x", {}, s}; };
  TransferOutcomes res;
  res[{Category::IA, Category::MG}] = {outcome(true), outcome(false), outcome(true), outcome(true)};
  res[{Category::IA, Category::IA}] = {outcome(true)};
  const TransferMatrix m = transfer_matrix(res);
  CHECK(*m.at(Category::IA, Category::MG) == 0.75);
  CHECK(*m.at(Category::IA, Category::IA) == 1.0);
  CHECK(!m.at(Category::MG, Category::IA).has_value());
  const std::string csv = transfer_matrix_csv(m);
  CHECK(csv.rfind("source,IA,HS,MG,", 0) == 0);
  CHECK(csv.find("\nIA,100.00,NA,75.00,NA") != std::string::npos);
  CHECK(csv.find("\nGD,NA,NA") != std::string::npos);
}
