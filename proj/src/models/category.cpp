#include "mlai/models/category.hpp"

#include <stdexcept>

namespace mlai {
namespace {
constexpr std::array<std::string_view, kCategoryCount> kCodes = {
    "IA", "HS", "MG", "PH", "EH", "FR", "PO", "PL", "PV", "LO", "FA", "HC", "GD"};
}

std::string_view to_code(Category c) { return kCodes[index_of(c)]; }

std::optional<Category> parse_category(std::string_view code) {
  for (std::size_t i = 0; i < kCodes.size(); ++i) {
    if (kCodes[i] == code) return static_cast<Category>(i);
  }
  return std::nullopt;
}

Category category_from_code(std::string_view code) {
  if (auto c = parse_category(code)) return *c;
  throw std::invalid_argument("unknown scenario category code '" + std::string(code) + "'");
}

}  // namespace mlai
