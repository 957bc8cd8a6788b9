#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mlai/models/target_model.hpp"
#include "mlai/tensor/rng.hpp"

namespace mlai {

struct ToyVlmConfig {
  std::size_t height = 8;
  std::size_t width = 8;
  std::size_t channels = 3;
  std::size_t patch_size = 1;
  std::size_t embed_dim = 16;
  std::size_t vocab_size = 32;
  /// Tokens [0, harmful_tokens) form the target (harmful) vocabulary.
  std::size_t harmful_tokens = 8;
  double scenario_coupling = 0.5;
  /// Weight of the neighbouring-patch contrast ("information content") term.
  double texture_gain = 12.0;
  /// Logit offset subtracted from harmful tokens (the model's default refusal).
  double harm_bias = 1.5;
  /// Extra alignment of harmful-token readout rows with the harm direction.
  double harm_alignment = 1.0;
  double instruction_scale = 5.0;
  double visual_scale = 1.0;
  std::size_t response_length = 4;
  /// Grid is forced to the patch grid.
  EmbeddingSpec embeddings;
};

/// Single-step toy vision-language scorer.
///
/// Patch features f_j are grey-level means of each patch. The hidden state is
///   h = E (f - 1/2) + u * (coupling * <e_c, f> + texture_gain * tau(f)) + phi(text)
/// where e_c is the zero-mean, unit-norm prototype of the instruction category,
/// tau is the mean squared difference of neighbouring patches, u is a unit
/// "harm direction" and phi hashes the instruction words into signed features.
/// Logits are U h + b; harmful tokens carry bias -harm_bias and readout rows
/// shifted by harm_alignment * u.
class ToyVlm final : public TargetModel {
 public:
  ToyVlm(Seed seed, const ToyVlmConfig& cfg);

  ModelKind kind() const override { return ModelKind::ToyVlm; }
  std::size_t vocab_size() const override { return cfg_.vocab_size; }
  Shape input_shape() const override { return {cfg_.height, cfg_.width, cfg_.channels}; }
  const EmbeddingSet& scenario_embeddings() const override { return embeddings_; }
  const ToyVlmConfig& config() const { return cfg_; }
  Seed seed() const { return seed_; }

  /// Softmax token distribution for one instruction.
  std::vector<double> token_distribution(const Image& image, const Instruction& instruction) const;

 protected:
  double do_loss(const Image& image, std::span<const Instruction> batch,
                 const TargetCorpus& corpus) const override;
  LossAndGrad do_loss_and_grad(const Image& image, std::span<const Instruction> batch,
                               const TargetCorpus& corpus) const override;
  Response do_respond(const Image& image, const Instruction& instruction) const override;

 private:
  struct Features;
  Features features(const Image& image) const;
  std::vector<double> instruction_features(const Instruction& instruction) const;
  std::vector<double> log_probs(const Features& feat, const Instruction& instruction) const;
  LossAndGrad evaluate(const Image& image, std::span<const Instruction> batch,
                       const TargetCorpus& corpus, bool with_grad) const;

  Seed seed_;
  ToyVlmConfig cfg_;
  std::size_t grid_h_;
  std::size_t grid_w_;
  std::vector<double> embed_;       // embed_dim x patches, row-major
  std::vector<double> harm_dir_;    // embed_dim
  std::vector<double> readout_;     // vocab x embed_dim
  std::vector<double> bias_;        // vocab
  std::uint64_t text_salt_;
  EmbeddingSet embeddings_;
  std::array<std::vector<double>, kCategoryCount> centered_;  // zero-mean unit prototypes
};

std::shared_ptr<const ToyVlm> make_toy_vlm(Seed seed, const ToyVlmConfig& cfg);

/// Harmful tokens chunked into entries of three: {0,1,2},{3,4,5},...
TargetCorpus default_corpus(std::size_t harmful_tokens);

/// Lower-cased alphanumeric words.
std::vector<std::string> tokenize_words(std::string_view text);

}  // namespace mlai
