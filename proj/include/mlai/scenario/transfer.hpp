#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mlai/collab/collab.hpp"

namespace mlai {

/// cell[s][t]: ASR of images built for source scenario s against target
/// scenario t instructions; nullopt marks a cell without outcomes.
struct TransferMatrix {
  std::array<std::array<std::optional<double>, kCategoryCount>, kCategoryCount> cell;

  std::optional<double> at(Category source, Category target) const {
    return cell[index_of(source)][index_of(target)];
  }
};

using TransferOutcomes = std::map<std::pair<Category, Category>, std::vector<AttackOutcome>>;

TransferMatrix transfer_matrix(const TransferOutcomes& results);

/// Header "source,IA,HS,...", one row per source; missing cells print "NA",
/// others as percentages with two decimals.
std::string transfer_matrix_csv(const TransferMatrix& m);

}  // namespace mlai
