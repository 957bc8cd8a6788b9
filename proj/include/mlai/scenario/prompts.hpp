#pragma once

#include <string>

#include "mlai/scenario/taxonomy.hpp"

namespace mlai {

struct ScenarioPrompt {
  Category category = Category::IA;
  std::string template_text;
  std::string instruction_ref;
};

class DenyListViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Fills the category template ("{code}" and "{name}" placeholders). The
/// instruction contributes only its id. Throws invalid_argument on an empty
/// template and DenyListViolation when a deny-listed word survives.
ScenarioPrompt build_prompt(const Taxonomy& taxonomy, Category category,
                            const Instruction& instruction);

/// Throws DenyListViolation when `text` contains a deny-listed word.
void check_deny_list(const Taxonomy& taxonomy, const std::string& text);

}  // namespace mlai
