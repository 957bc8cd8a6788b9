#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mlai/tensor/image.hpp"
#include "mlai/tensor/rng.hpp"

namespace mlai {

/// Fixed-length vector of finite reals.
class FeatureVector {
 public:
  FeatureVector() = default;
  explicit FeatureVector(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  bool operator==(const FeatureVector&) const = default;

 private:
  std::vector<double> values_;
};

Image new_image(std::size_t height, std::size_t width, std::size_t channels, double fill);

/// Pixels drawn from SplitMix64(seed).uniform() in row-major order.
Image seeded_noise(Seed seed, std::size_t height, std::size_t width, std::size_t channels);

/// Per pixel: clamp(image, ref - eps, ref + eps), then clamp to [0,1].
Image linf_project(const Image& image, const Image& reference, double eps);

double linf_distance(const Image& a, const Image& b);

/// Block boundaries along one axis: block i covers [floor(i*n/g), floor((i+1)*n/g)).
std::size_t block_start(std::size_t i, std::size_t n, std::size_t g);

/// Channel-averaged, block-mean-pooled gh x gw fingerprint (row-major blocks).
FeatureVector downsample_gray(const Image& image, std::size_t gh, std::size_t gw);

/// dot(a,b)/(|a||b|); 0 when either vector is all zero.
double cosine_similarity(const FeatureVector& a, const FeatureVector& b);
double cosine_similarity(std::span<const double> a, std::span<const double> b);

}  // namespace mlai
