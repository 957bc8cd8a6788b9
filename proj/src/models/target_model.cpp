#include "mlai/models/target_model.hpp"

#include <algorithm>
#include <stdexcept>

namespace mlai {

TargetCorpus::TargetCorpus(std::vector<std::vector<std::size_t>> entries)
    : entries_(std::move(entries)) {
  if (entries_.empty()) throw std::invalid_argument("target corpus must have at least one entry");
  for (const auto& e : entries_) {
    if (e.empty()) throw std::invalid_argument("target corpus entries must be non-empty");
  }
}

std::size_t TargetCorpus::max_token() const {
  std::size_t m = 0;
  for (const auto& e : entries_) m = std::max(m, *std::max_element(e.begin(), e.end()));
  return m;
}

std::size_t TargetCorpus::total_tokens() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.size();
  return n;
}

void TargetModel::validate(const Image& image, std::span<const Instruction> batch,
                           const TargetCorpus& corpus) const {
  if (batch.empty()) throw std::invalid_argument("instruction batch must be non-empty");
  if (corpus.max_token() >= vocab_size()) {
    throw std::invalid_argument("corpus token " + std::to_string(corpus.max_token()) +
                                " outside model vocabulary of " + std::to_string(vocab_size()));
  }
  require_same_shape(image.shape(), input_shape(), "target model input");
}

double TargetModel::loss(const Image& image, std::span<const Instruction> batch,
                         const TargetCorpus& corpus) const {
  validate(image, batch, corpus);
  return do_loss(image, batch, corpus);
}

Gradient TargetModel::grad(const Image& image, std::span<const Instruction> batch,
                           const TargetCorpus& corpus) const {
  validate(image, batch, corpus);
  return do_loss_and_grad(image, batch, corpus).grad;
}

LossAndGrad TargetModel::loss_and_grad(const Image& image, std::span<const Instruction> batch,
                                       const TargetCorpus& corpus) const {
  validate(image, batch, corpus);
  return do_loss_and_grad(image, batch, corpus);
}

Response TargetModel::respond(const Image& image, const Instruction& instruction) const {
  require_same_shape(image.shape(), input_shape(), "target model input");
  return do_respond(image, instruction);
}

}  // namespace mlai
