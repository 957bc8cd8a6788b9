#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "mlai/models/target_model.hpp"
#include "mlai/tensor/rng.hpp"

namespace mlai {

struct LandscapeMinimum {
  Image center;
  double depth = 0.0;
  double sharpness = 1.0;
};

struct LandscapeSpec {
  std::vector<LandscapeMinimum> minima;
  /// Test-time translation of every basin; zero when absent.
  std::optional<Gradient> shift;
  /// Loss at which harm_score crosses 1/2.
  double harm_level = 1.0;
  double temperature = 0.1;
  /// Each instruction sees shift scaled by a hashed multiplier in [lo, hi].
  double instruction_shift_lo = 1.0;
  double instruction_shift_hi = 1.0;
  std::uint64_t salt = 0;
  /// Prototype recipe; painting needs an image at least as large as its grid.
  EmbeddingSpec embeddings;
};

/// loss(x) = min_m depth_m + sharpness_m * |x - center_m - shift|^2.
///
/// Responses score instruction i with its own shift multiplier lambda_i:
///   harm_score = sigmoid((harm_level - loss_i(x)) / temperature)
/// and emit token 1 when harm_score >= 1/2, token 0 otherwise. Batch and
/// corpus do not enter the loss.
class SyntheticLandscape final : public TargetModel {
 public:
  explicit SyntheticLandscape(LandscapeSpec spec);

  ModelKind kind() const override { return ModelKind::SyntheticLandscape; }
  std::size_t vocab_size() const override { return 2; }
  Shape input_shape() const override { return shape_; }
  const EmbeddingSet& scenario_embeddings() const override { return embeddings_; }
  const LandscapeSpec& spec() const { return spec_; }

  double instruction_shift_scale(const Instruction& instruction) const;
  /// Loss with the shift multiplied by `scale`.
  double shifted_loss(const Image& image, double scale) const;

 protected:
  double do_loss(const Image& image, std::span<const Instruction> batch,
                 const TargetCorpus& corpus) const override;
  LossAndGrad do_loss_and_grad(const Image& image, std::span<const Instruction> batch,
                               const TargetCorpus& corpus) const override;
  Response do_respond(const Image& image, const Instruction& instruction) const override;

 private:
  std::pair<double, std::size_t> active(const Image& image, double scale) const;

  LandscapeSpec spec_;
  Shape shape_;
  EmbeddingSet embeddings_;
};

std::shared_ptr<const SyntheticLandscape> make_synthetic_landscape(LandscapeSpec spec);

/// Parameters of the per-scenario landscape suites. Each cell gets a single
/// quadratic basin centred near its initial image; the evaluation copy is
/// translated along the descent direction by sqrt(shift_loss / sharpness),
/// so the loss at the training centre rises by shift_loss on every basin.
struct LandscapeSuiteConfig {
  std::size_t height = 8;
  std::size_t width = 8;
  std::size_t channels = 1;
  std::array<double, kCategoryCount> sharpness = {100, 100, 30, 30, 10, 10, 10,
                                                  3,   10,  1,  1,  3,  3};
  double depth = 0.0;
  double shift_loss = 4.0;
  double margin = 1.0;
  double temperature = 0.1;
  /// Centre offset per pixel drawn from U[-center_offset*eps, center_offset*eps].
  double center_offset = 0.8;
  double eps = 32.0 / 255.0;
  double instruction_shift_lo = -1.0;
  double instruction_shift_hi = 1.0;
  EmbeddingSpec embeddings;

  static LandscapeSuiteConfig uniform(double sharpness);
};

struct LandscapeCell {
  std::shared_ptr<const SyntheticLandscape> train;
  std::shared_ptr<const SyntheticLandscape> eval;
};

LandscapeCell make_landscape_cell(const LandscapeSuiteConfig& cfg, Category category, Seed seed,
                                  const Image& init);

}  // namespace mlai
