#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mlai/lossrange/lossrange.hpp"
#include "mlai/models/landscape.hpp"
#include "mlai/models/target_model.hpp"
#include "mlai/models/toy_vlm.hpp"
#include "mlai/tensor/ops.hpp"

namespace mlai::test {

inline std::filesystem::path source_dir() { return MLAI_SOURCE_DIR; }

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mlai_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::vector<Instruction> instructions(Category c, std::size_t n) {
  std::vector<Instruction> out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string code(to_code(c));
    out.push_back({code + "-" + std::to_string(i),
                   "placeholder request number " + std::to_string(i) + " about " + code, c});
  }
  return out;
}

/// Single quadratic basin; no shift.
inline std::shared_ptr<const SyntheticLandscape> quadratic(const Image& center, double sharpness,
                                                           double depth = 0.0) {
  LandscapeSpec spec;
  spec.minima.push_back({center, depth, sharpness});
  return make_synthetic_landscape(spec);
}

/// harm_score is the first pixel; loss is its distance from 1.
class PixelHarmModel final : public TargetModel {
 public:
  explicit PixelHarmModel(Shape shape) : shape_(shape) {}
  ModelKind kind() const override { return ModelKind::SyntheticLandscape; }
  std::size_t vocab_size() const override { return 2; }
  Shape input_shape() const override { return shape_; }
  const EmbeddingSet& scenario_embeddings() const override { return emb_; }

 protected:
  double do_loss(const Image& x, std::span<const Instruction>, const TargetCorpus&) const override {
    return 1.0 - x[0];
  }
  LossAndGrad do_loss_and_grad(const Image& x, std::span<const Instruction> b,
                               const TargetCorpus& c) const override {
    Gradient g = Gradient::zeros(x.shape());
    g.values[0] = -1.0;
    return {do_loss(x, b, c), g};
  }
  Response do_respond(const Image& x, const Instruction&) const override {
    return {{x[0] >= 0.5 ? 1u : 0u}, x[0]};
  }

 private:
  Shape shape_;
  EmbeddingSet emb_ = make_embeddings(EmbeddingSpec{});
};

/// Candidate set whose members carry the given images, iterations 0..n-1.
inline CandidateSet set_of(const std::vector<Image>& images) {
  CandidateSet s;
  for (std::size_t i = 0; i < images.size(); ++i) s.members.push_back({i, 0.0, images[i]});
  return s;
}

inline Image image_from(Shape shape, std::vector<double> values) {
  return Image(shape, std::move(values));
}

}  // namespace mlai::test
