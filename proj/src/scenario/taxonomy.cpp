#include "mlai/scenario/taxonomy.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "internal/yaml_util.hpp"
#include "mlai/models/toy_vlm.hpp"

namespace mlai {

using detail::fail_at;
using detail::MapReader;
using detail::scalar_as;

namespace {

YAML::Node load_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), 0, 0, "cannot open table");
  std::ostringstream ss;
  ss << in.rdbuf();
  return detail::load_document(ss.str(), path.string());
}

void check_schema(MapReader& r) {
  const auto v = r.require<int>("schema_version");
  if (v != 1) fail_at(r.source(), r.node()["schema_version"], "unsupported schema_version");
}

// Reads a code-keyed mapping and insists every category appears exactly once.
template <class F>
void per_category(const YAML::Node& node, const std::string& source, const std::string& what,
                  F&& fn) {
  if (!node || !node.IsMap()) fail_at(source, node, what + ": expected a mapping by code");
  std::array<bool, kCategoryCount> seen{};
  for (const auto& kv : node) {
    const Category c = detail::category_at(kv.first, source, what);
    if (seen[index_of(c)]) fail_at(source, kv.first, what + ": duplicate code");
    seen[index_of(c)] = true;
    fn(c, kv.second);
  }
  for (Category c : kAllCategories) {
    if (!seen[index_of(c)]) fail_at(source, node, what + ": missing code " + std::string(to_code(c)));
  }
}

}  // namespace

Taxonomy::Taxonomy(std::array<ScenarioCategory, kCategoryCount> categories,
                   std::array<std::vector<std::string>, kCategoryCount> keywords,
                   std::array<std::string, kCategoryCount> templates,
                   std::vector<std::string> deny_list,
                   std::array<std::vector<Instruction>, kCategoryCount> instructions)
    : categories_(std::move(categories)),
      keywords_(std::move(keywords)),
      templates_(std::move(templates)),
      deny_list_(std::move(deny_list)),
      instructions_(std::move(instructions)) {
  for (Category c : kAllCategories) {
    if (categories_[index_of(c)].id != c) {
      throw std::invalid_argument("taxonomy categories must follow canonical order");
    }
    for (auto& k : keywords_[index_of(c)]) {
      const auto words = tokenize_words(k);
      if (words.size() != 1) throw std::invalid_argument("keyword '" + k + "' must be one word");
      k = words.front();
    }
  }
  for (auto& w : deny_list_) {
    const auto words = tokenize_words(w);
    if (words.size() != 1) throw std::invalid_argument("deny-list entry '" + w + "' must be one word");
    w = words.front();
  }
}

Taxonomy Taxonomy::load(const std::filesystem::path& dir) {
  std::array<ScenarioCategory, kCategoryCount> cats;
  {
    const auto path = (dir / "categories.yaml").string();
    MapReader r(load_table(dir / "categories.yaml"), path, "");
    check_schema(r);
    const YAML::Node list = r.child("categories");
    r.finish();
    if (!list || !list.IsSequence()) fail_at(path, r.node(), "categories: expected a list");
    std::array<bool, kCategoryCount> seen{};
    for (const auto& item : list) {
      MapReader cr(item, path, "categories[]");
      const Category c = detail::category_at(cr.child("code"), path, "categories[].code");
      if (seen[index_of(c)]) fail_at(path, item, "duplicate category code");
      seen[index_of(c)] = true;
      cats[index_of(c)] = {c, cr.require<std::string>("name"), cr.require<std::string>("description")};
      cr.finish();
    }
    for (Category c : kAllCategories) {
      if (!seen[index_of(c)]) fail_at(path, list, "missing category " + std::string(to_code(c)));
    }
  }

  std::array<std::vector<std::string>, kCategoryCount> keywords;
  {
    const auto path = (dir / "keywords.yaml").string();
    MapReader r(load_table(dir / "keywords.yaml"), path, "");
    check_schema(r);
    per_category(r.child("keywords"), path, "keywords", [&](Category c, const YAML::Node& n) {
      if (!n.IsSequence() || n.size() == 0) fail_at(path, n, "keywords: expected a non-empty list");
      for (const auto& w : n) keywords[index_of(c)].push_back(scalar_as<std::string>(w, path, "keyword"));
    });
    r.finish();
  }

  std::array<std::string, kCategoryCount> templates;
  std::vector<std::string> deny;
  {
    const auto path = (dir / "templates.yaml").string();
    MapReader r(load_table(dir / "templates.yaml"), path, "");
    check_schema(r);
    const YAML::Node d = r.child("deny_list");
    if (!d || !d.IsSequence()) fail_at(path, r.node(), "deny_list: expected a list");
    for (const auto& w : d) deny.push_back(scalar_as<std::string>(w, path, "deny_list"));
    per_category(r.child("templates"), path, "templates", [&](Category c, const YAML::Node& n) {
      templates[index_of(c)] = scalar_as<std::string>(n, path, "templates");
    });
    r.finish();
  }

  std::array<std::vector<Instruction>, kCategoryCount> instructions;
  Taxonomy partial(cats, keywords, templates, deny);
  const auto ipath = dir / "instructions.yaml";
  if (std::filesystem::exists(ipath)) {
    const auto path = ipath.string();
    MapReader r(load_table(ipath), path, "");
    check_schema(r);
    const YAML::Node list = r.child("instructions");
    r.finish();
    if (!list || !list.IsSequence()) fail_at(path, r.node(), "instructions: expected a list");
    std::set<std::string> ids;
    for (const auto& item : list) {
      MapReader ir(item, path, "instructions[]");
      Instruction in;
      in.id = ir.require<std::string>("id");
      in.category = detail::category_at(ir.child("category"), path, "instructions[].category");
      in.text = ir.require<std::string>("text");
      ir.finish();
      if (in.text.empty()) fail_at(path, item, "instruction text must be non-empty");
      if (!ids.insert(in.id).second) fail_at(path, item, "duplicate instruction id " + in.id);
      try {
        if (categorize(partial, in.text) != in.category) {
          fail_at(path, item, "instruction " + in.id + " categorizes to a different scenario");
        }
      } catch (const NoCategoryMatch&) {
        fail_at(path, item, "instruction " + in.id + " matches no scenario keyword");
      }
      instructions[index_of(in.category)].push_back(std::move(in));
    }
  }
  return Taxonomy(std::move(cats), std::move(keywords), std::move(templates), std::move(deny),
                  std::move(instructions));
}

Taxonomy Taxonomy::load_default() { return load(default_data_dir()); }

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("MLAI_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return MLAI_DEFAULT_DATA_DIR;
}

Category categorize(const Taxonomy& taxonomy, std::string_view text) {
  if (text.empty()) throw std::invalid_argument("cannot categorize empty text");
  const auto words = tokenize_words(text);
  std::array<std::size_t, kCategoryCount> hits{};
  for (const auto& w : words) {
    for (Category c : kAllCategories) {
      for (const auto& k : taxonomy.keywords(c)) {
        if (w == k) ++hits[index_of(c)];
      }
    }
  }
  std::optional<Category> best;
  for (Category c : kAllCategories) {
    if (hits[index_of(c)] == 0) continue;
    if (!best || hits[index_of(c)] > hits[index_of(*best)] ||
        (hits[index_of(c)] == hits[index_of(*best)] && to_code(c) < to_code(*best))) {
      best = c;
    }
  }
  if (!best) throw NoCategoryMatch("no scenario keyword in: " + std::string(text));
  return *best;
}

}  // namespace mlai
