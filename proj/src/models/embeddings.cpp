#include "mlai/models/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace mlai {
namespace {

using Mask = std::vector<bool>;

std::vector<double> render(const Mask& m, double low, double high) {
  std::vector<double> v(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) v[i] = m[i] ? high : low;
  return v;
}

std::size_t overlap(const Mask& a, const Mask& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += (a[i] && b[i]) ? 1 : 0;
  return n;
}

// Picks `count` distinct indices from `pool` by partial Fisher-Yates.
std::vector<std::size_t> sample(std::vector<std::size_t> pool, std::size_t count, SplitMix64& rng) {
  if (count > pool.size()) throw std::invalid_argument("embedding grid too small for constraints");
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace

EmbeddingSet make_embeddings(const EmbeddingSpec& spec) {
  const std::size_t dim = spec.grid_h * spec.grid_w;
  if (dim == 0) throw std::invalid_argument("embedding grid must be non-empty");
  if (!(spec.low >= 0.0 && spec.high <= 1.0 && spec.low < spec.high)) {
    throw std::invalid_argument("embedding intensities must satisfy 0 <= low < high <= 1");
  }
  const auto on = static_cast<std::size_t>(
      std::clamp<long>(std::lround(spec.on_fraction * static_cast<double>(dim)), 1,
                       static_cast<long>(dim)));
  const auto max_overlap =
      static_cast<std::size_t>(std::floor(spec.max_overlap_fraction * static_cast<double>(on)));

  auto coupled_with = [&](Category c) -> std::optional<EmbeddingCoupling> {
    for (const auto& cp : spec.couplings) {
      if (cp.a == c || cp.b == c) return cp;
    }
    return std::nullopt;
  };
  auto must_be_disjoint = [&](Category x, Category y) {
    for (const auto& d : spec.disjoint) {
      if ((d.a == x && d.b == y) || (d.a == y && d.b == x)) return true;
    }
    return false;
  };
  auto are_coupled = [&](Category x, Category y) {
    for (const auto& cp : spec.couplings) {
      if ((cp.a == x && cp.b == y) || (cp.a == y && cp.b == x)) return true;
    }
    return false;
  };

  SplitMix64 rng(spec.seed);
  std::array<Mask, kCategoryCount> masks;
  std::array<bool, kCategoryCount> done{};

  for (Category c : kAllCategories) {
    // Blocks this category may not use.
    Mask forbidden(dim, false);
    for (Category o : kAllCategories) {
      if (done[index_of(o)] && must_be_disjoint(c, o)) {
        for (std::size_t i = 0; i < dim; ++i) forbidden[i] = forbidden[i] || masks[index_of(o)][i];
      }
    }

    const auto coupling = coupled_with(c);
    const Category partner = coupling ? (coupling->a == c ? coupling->b : coupling->a) : c;
    if (coupling && done[index_of(partner)]) {
      const Mask& base = masks[index_of(partner)];
      // Number of swapped blocks whose rendered cosine is nearest the target.
      std::size_t best_k = 0;
      double best_err = INFINITY;
      for (std::size_t k = 0; k <= on; ++k) {
        Mask probe(dim, false);
        for (std::size_t i = 0, placed = 0; i < dim && placed < on - k; ++i) {
          if (base[i]) { probe[i] = true; ++placed; }
        }
        for (std::size_t i = 0, placed = 0; i < dim && placed < k; ++i) {
          if (!base[i]) { probe[i] = true; ++placed; }
        }
        const double cs = cosine_similarity(render(probe, spec.low, spec.high),
                                            render(base, spec.low, spec.high));
        const double err = std::abs(cs - coupling->cosine);
        if (err < best_err) { best_err = err; best_k = k; }
      }
      std::vector<std::size_t> on_idx, off_idx;
      for (std::size_t i = 0; i < dim; ++i) {
        if (base[i]) on_idx.push_back(i);
        else if (!forbidden[i]) off_idx.push_back(i);
      }
      const auto dropped = sample(on_idx, best_k, rng);
      const auto added = sample(off_idx, best_k, rng);
      Mask m = base;
      for (auto i : dropped) m[i] = false;
      for (auto i : added) m[i] = true;
      masks[index_of(c)] = std::move(m);
      done[index_of(c)] = true;
      continue;
    }

    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < dim; ++i) {
      if (!forbidden[i]) pool.push_back(i);
    }
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      Mask m(dim, false);
      for (auto i : sample(pool, on, rng)) m[i] = true;
      bool ok = true;
      for (Category o : kAllCategories) {
        if (!done[index_of(o)] || are_coupled(c, o)) continue;
        const std::size_t ov = overlap(m, masks[index_of(o)]);
        if (ov > max_overlap || ov == on) { ok = false; break; }
      }
      if (ok) {
        masks[index_of(c)] = std::move(m);
        placed = true;
      }
    }
    if (!placed) {
      throw std::invalid_argument("cannot place prototype for " + std::string(to_code(c)) +
                                  " under the overlap constraints");
    }
    done[index_of(c)] = true;
  }

  EmbeddingSet set;
  set.grid_h = spec.grid_h;
  set.grid_w = spec.grid_w;
  for (Category c : kAllCategories) {
    set.prototypes[index_of(c)] = FeatureVector(render(masks[index_of(c)], spec.low, spec.high));
  }
  return set;
}

EmbeddingSpec coupled_embedding_spec() {
  EmbeddingSpec spec;
  spec.couplings = {{Category::IA, Category::MG, 0.9}, {Category::FR, Category::LO, 0.9}};
  spec.disjoint = {{Category::IA, Category::PO}, {Category::MG, Category::PO}};
  return spec;
}

Image paint_prototype(const EmbeddingSet& set, Category c, Shape shape) {
  validate_shape(shape);
  if (set.grid_h > shape.height || set.grid_w > shape.width) {
    throw std::invalid_argument("image " + shape.str() + " smaller than the embedding grid");
  }
  const FeatureVector& proto = set[c];
  std::vector<double> data(shape.size());
  for (std::size_t by = 0; by < set.grid_h; ++by) {
    const std::size_t y0 = block_start(by, shape.height, set.grid_h);
    const std::size_t y1 = block_start(by + 1, shape.height, set.grid_h);
    for (std::size_t bx = 0; bx < set.grid_w; ++bx) {
      const std::size_t x0 = block_start(bx, shape.width, set.grid_w);
      const std::size_t x1 = block_start(bx + 1, shape.width, set.grid_w);
      const double v = proto[by * set.grid_w + bx];
      for (std::size_t y = y0; y < y1; ++y)
        for (std::size_t x = x0; x < x1; ++x)
          for (std::size_t ch = 0; ch < shape.channels; ++ch) data[shape.index(y, x, ch)] = v;
    }
  }
  return Image(shape, std::move(data));
}

}  // namespace mlai
