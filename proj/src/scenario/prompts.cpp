#include "mlai/scenario/prompts.hpp"

#include "mlai/models/toy_vlm.hpp"

namespace mlai {

namespace {

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

}  // namespace

void check_deny_list(const Taxonomy& taxonomy, const std::string& text) {
  for (const auto& w : tokenize_words(text)) {
    for (const auto& d : taxonomy.deny_list()) {
      if (w == d) throw DenyListViolation("prompt contains deny-listed word '" + d + "'");
    }
  }
}

ScenarioPrompt build_prompt(const Taxonomy& taxonomy, Category category,
                            const Instruction& instruction) {
  std::string text = taxonomy.template_text(category);
  if (text.empty()) {
    throw std::invalid_argument("empty prompt template for " + std::string(to_code(category)));
  }
  replace_all(text, "{code}", std::string(to_code(category)));
  replace_all(text, "{name}", taxonomy.category(category).name);
  check_deny_list(taxonomy, text);
  return {category, std::move(text), instruction.id};
}

}  // namespace mlai
