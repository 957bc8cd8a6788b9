#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mlai/models/category.hpp"
#include "mlai/models/embeddings.hpp"
#include "mlai/tensor/image.hpp"

namespace mlai {

struct Instruction {
  std::string id;
  std::string text;
  Category category = Category::IA;
};

/// Target responses y_k as token-index sequences.
class TargetCorpus {
 public:
  explicit TargetCorpus(std::vector<std::vector<std::size_t>> entries);

  const std::vector<std::vector<std::size_t>>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t max_token() const;
  std::size_t total_tokens() const;

 private:
  std::vector<std::vector<std::size_t>> entries_;
};

struct Response {
  std::vector<std::size_t> token_indices;
  double harm_score = 0.0;
  bool operator==(const Response&) const = default;
};

enum class ModelKind { ToyVlm, SyntheticLandscape };

struct LossAndGrad {
  double loss = 0.0;
  Gradient grad;
};

/// Differentiable target: fixed parameters, pure loss/grad/respond. Public entry
/// points validate inputs and forward to the do_* hooks.
class TargetModel {
 public:
  virtual ~TargetModel() = default;

  virtual ModelKind kind() const = 0;
  virtual std::size_t vocab_size() const = 0;
  virtual Shape input_shape() const = 0;
  virtual const EmbeddingSet& scenario_embeddings() const = 0;

  /// Sum over batch instructions and corpus entries of -log p(y_k | t, image).
  double loss(const Image& image, std::span<const Instruction> batch,
              const TargetCorpus& corpus) const;
  Gradient grad(const Image& image, std::span<const Instruction> batch,
                const TargetCorpus& corpus) const;
  LossAndGrad loss_and_grad(const Image& image, std::span<const Instruction> batch,
                            const TargetCorpus& corpus) const;
  Response respond(const Image& image, const Instruction& instruction) const;

 protected:
  virtual double do_loss(const Image& image, std::span<const Instruction> batch,
                         const TargetCorpus& corpus) const = 0;
  virtual LossAndGrad do_loss_and_grad(const Image& image, std::span<const Instruction> batch,
                                       const TargetCorpus& corpus) const = 0;
  virtual Response do_respond(const Image& image, const Instruction& instruction) const = 0;

 private:
  void validate(const Image& image, std::span<const Instruction> batch,
                const TargetCorpus& corpus) const;
};

}  // namespace mlai
