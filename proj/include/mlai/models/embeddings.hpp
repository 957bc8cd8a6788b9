#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "mlai/models/category.hpp"
#include "mlai/tensor/ops.hpp"
#include "mlai/tensor/rng.hpp"

namespace mlai {

struct EmbeddingCoupling {
  Category a;
  Category b;
  double cosine;  // target raw cosine between the two prototypes
};

struct EmbeddingDisjoint {
  Category a;
  Category b;
};

/// Recipe for the per-category prototype patterns. Each prototype is a binary
/// block mask on a gh x gw grid rendered as `low`/`high` intensities, so it is
/// both a fingerprint-space vector and a paintable image.
struct EmbeddingSpec {
  std::size_t grid_h = 8;
  std::size_t grid_w = 8;
  double on_fraction = 0.25;
  double low = 0.05;
  double high = 0.95;
  /// Uncoupled pairs share at most this fraction of their "on" blocks.
  double max_overlap_fraction = 0.375;
  Seed seed{20240611};
  std::vector<EmbeddingCoupling> couplings;
  std::vector<EmbeddingDisjoint> disjoint;
};

/// One prototype per category, all of length grid_h * grid_w.
struct EmbeddingSet {
  std::size_t grid_h = 0;
  std::size_t grid_w = 0;
  std::array<FeatureVector, kCategoryCount> prototypes;

  const FeatureVector& operator[](Category c) const { return prototypes[index_of(c)]; }
  std::size_t dim() const { return grid_h * grid_w; }
};

/// Deterministic in the spec; throws std::invalid_argument when the
/// constraints cannot be met.
EmbeddingSet make_embeddings(const EmbeddingSpec& spec);

/// The bundled coupled spec used for cross-scenario transfer: IA~MG and FR~LO
/// at cosine 0.9, PO disjoint from IA and MG.
EmbeddingSpec coupled_embedding_spec();

/// Paints a prototype onto an image: every pixel of block (i,j) in every
/// channel takes the prototype's (i,j) value. Block boundaries follow
/// block_start, so downsample_gray at the embedding grid returns the
/// prototype exactly.
Image paint_prototype(const EmbeddingSet& set, Category c, Shape shape);

}  // namespace mlai
