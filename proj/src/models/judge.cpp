#include "mlai/models/judge.hpp"

#include <stdexcept>

namespace mlai {

void validate_judge(const Judge& j) {
  if (!(j.threshold > 0.0 && j.threshold < 1.0)) {
    throw std::invalid_argument("judge threshold must lie in (0,1)");
  }
}

bool judge(const Judge& j, const Response& r) { return r.harm_score >= j.threshold; }

RemoteJudge::RemoteJudge(std::string endpoint, Judge local)
    : endpoint_(std::move(endpoint)), local_(local) {
  validate_judge(local_);
}

bool RemoteJudge::verdict(const Response& r, const std::string&) const { return judge(local_, r); }

}  // namespace mlai
