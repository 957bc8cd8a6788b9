#include "mlai/scenario/transfer.hpp"

#include <sstream>

namespace mlai {

TransferMatrix transfer_matrix(const TransferOutcomes& results) {
  TransferMatrix m;
  for (const auto& [key, outcomes] : results) {
    if (outcomes.empty()) continue;
    m.cell[index_of(key.first)][index_of(key.second)] = compute_asr(outcomes);
  }
  return m;
}

std::string transfer_matrix_csv(const TransferMatrix& m) {
  std::ostringstream out;
  out << "source";
  for (Category t : kAllCategories) out << ',' << to_code(t);
  out << '\n';
  for (Category s : kAllCategories) {
    out << to_code(s);
    for (Category t : kAllCategories) {
      const auto v = m.at(s, t);
      out << ',' << (v ? format_percent(*v) : "NA");
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace mlai
