#pragma once

#include <span>

#include "mlai/models/target_model.hpp"

namespace mlai {

/// Central differences (loss(x+h e_i) - loss(x-h e_i)) / 2h. Pixels within h
/// of 0 or 1 use the one-sided difference that stays inside [0,1].
Gradient fd_gradient(const TargetModel& model, const Image& image,
                     std::span<const Instruction> batch, const TargetCorpus& corpus, double h);

/// max_i |a_i - b_i| / max(|a|_inf, |b|_inf); 0 when both are zero.
double gradient_relative_error(const Gradient& a, const Gradient& b);

}  // namespace mlai
