#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace mlai {

/// The 13 jailbreak scenario categories, in canonical policy-table order.
enum class Category : std::uint8_t { IA, HS, MG, PH, EH, FR, PO, PL, PV, LO, FA, HC, GD };

inline constexpr std::size_t kCategoryCount = 13;

inline constexpr std::array<Category, kCategoryCount> kAllCategories = {
    Category::IA, Category::HS, Category::MG, Category::PH, Category::EH,
    Category::FR, Category::PO, Category::PL, Category::PV, Category::LO,
    Category::FA, Category::HC, Category::GD};

std::string_view to_code(Category c);
std::optional<Category> parse_category(std::string_view code);
/// Throws std::invalid_argument on an unknown code.
Category category_from_code(std::string_view code);
inline std::size_t index_of(Category c) { return static_cast<std::size_t>(c); }

}  // namespace mlai
