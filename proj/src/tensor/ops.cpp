#include "mlai/tensor/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mlai {

FeatureVector::FeatureVector(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("feature vector entry is not finite");
  }
}

Image new_image(std::size_t height, std::size_t width, std::size_t channels, double fill) {
  if (!(fill >= 0.0 && fill <= 1.0)) {
    throw std::invalid_argument("fill value must lie in [0,1], got " + std::to_string(fill));
  }
  const Shape shape{height, width, channels};
  validate_shape(shape);
  return Image(shape, std::vector<double>(shape.size(), fill));
}

Image seeded_noise(Seed seed, std::size_t height, std::size_t width, std::size_t channels) {
  const Shape shape{height, width, channels};
  validate_shape(shape);
  SplitMix64 rng(seed);
  std::vector<double> data(shape.size());
  for (double& v : data) v = rng.uniform();
  return Image(shape, std::move(data));
}

Image linf_project(const Image& image, const Image& reference, double eps) {
  require_same_shape(image.shape(), reference.shape(), "linf_project");
  if (!(eps >= 0.0)) throw std::invalid_argument("linf_project: eps must be >= 0");
  std::vector<double> out(image.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double r = reference[i];
    out[i] = std::clamp(std::clamp(image[i], r - eps, r + eps), 0.0, 1.0);
  }
  return Image(image.shape(), std::move(out));
}

double linf_distance(const Image& a, const Image& b) {
  require_same_shape(a.shape(), b.shape(), "linf_distance");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::size_t block_start(std::size_t i, std::size_t n, std::size_t g) { return i * n / g; }

FeatureVector downsample_gray(const Image& image, std::size_t gh, std::size_t gw) {
  if (gh == 0 || gw == 0 || gh > image.height() || gw > image.width()) {
    throw std::invalid_argument("downsample grid " + std::to_string(gh) + "x" +
                                std::to_string(gw) + " does not fit image " +
                                image.shape().str());
  }
  std::vector<double> out(gh * gw, 0.0);
  const std::size_t c = image.channels();
  for (std::size_t by = 0; by < gh; ++by) {
    const std::size_t y0 = block_start(by, image.height(), gh);
    const std::size_t y1 = block_start(by + 1, image.height(), gh);
    for (std::size_t bx = 0; bx < gw; ++bx) {
      const std::size_t x0 = block_start(bx, image.width(), gw);
      const std::size_t x1 = block_start(bx + 1, image.width(), gw);
      double sum = 0.0;
      for (std::size_t y = y0; y < y1; ++y)
        for (std::size_t x = x0; x < x1; ++x)
          for (std::size_t ch = 0; ch < c; ++ch) sum += image.at(y, x, ch);
      out[by * gw + bx] = sum / static_cast<double>((y1 - y0) * (x1 - x0) * c);
    }
  }
  return FeatureVector(std::move(out));
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine_similarity: length mismatch " +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double cosine_similarity(const FeatureVector& a, const FeatureVector& b) {
  return cosine_similarity(a.values(), b.values());
}

}  // namespace mlai
