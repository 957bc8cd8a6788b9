#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mlai/models/target_model.hpp"

namespace mlai {

struct ScenarioCategory {
  Category id = Category::IA;
  std::string name;
  std::string description;
};

/// Read-only category, keyword, template and instruction tables.
class Taxonomy {
 public:
  /// Loads categories.yaml, keywords.yaml, templates.yaml and, when present,
  /// instructions.yaml from `dir`. Throws ConfigError on schema problems.
  static Taxonomy load(const std::filesystem::path& dir);
  /// Loads from default_data_dir().
  static Taxonomy load_default();

  const ScenarioCategory& category(Category c) const { return categories_[index_of(c)]; }
  const std::vector<std::string>& keywords(Category c) const { return keywords_[index_of(c)]; }
  const std::string& template_text(Category c) const { return templates_[index_of(c)]; }
  const std::vector<std::string>& deny_list() const { return deny_list_; }
  /// Bundled placeholder instructions of one category, in file order.
  const std::vector<Instruction>& instructions(Category c) const {
    return instructions_[index_of(c)];
  }

  /// Builds a taxonomy from in-memory tables (tests).
  Taxonomy(std::array<ScenarioCategory, kCategoryCount> categories,
           std::array<std::vector<std::string>, kCategoryCount> keywords,
           std::array<std::string, kCategoryCount> templates, std::vector<std::string> deny_list,
           std::array<std::vector<Instruction>, kCategoryCount> instructions = {});

 private:
  std::array<ScenarioCategory, kCategoryCount> categories_;
  std::array<std::vector<std::string>, kCategoryCount> keywords_;
  std::array<std::string, kCategoryCount> templates_;
  std::vector<std::string> deny_list_;
  std::array<std::vector<Instruction>, kCategoryCount> instructions_;
};

/// MLAI_DATA_DIR when set, otherwise the data directory of the source tree.
std::filesystem::path default_data_dir();

class NoCategoryMatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Counts whole-word keyword hits per category; most hits wins, ties go to the
/// alphabetically smaller code. Empty text is invalid-argument; text without
/// any hit raises NoCategoryMatch.
Category categorize(const Taxonomy& taxonomy, std::string_view text);

}  // namespace mlai
