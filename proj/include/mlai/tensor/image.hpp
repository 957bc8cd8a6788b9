#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlai {

/// Largest accepted side length for images and gradients.
inline constexpr std::size_t kMaxImageSide = 256;
inline constexpr std::size_t kMaxChannels = 4;

struct Shape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;

  std::size_t size() const { return height * width * channels; }
  std::size_t index(std::size_t y, std::size_t x, std::size_t c) const {
    return (y * width + x) * channels + c;
  }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

/// Throws std::invalid_argument unless every dimension is in range.
void validate_shape(const Shape& shape);

/// Dense row-major (y, x, channel) grid of intensities, each finite and in [0,1].
class Image {
 public:
  Image(Shape shape, std::vector<double> data);

  const Shape& shape() const { return shape_; }
  std::size_t height() const { return shape_.height; }
  std::size_t width() const { return shape_.width; }
  std::size_t channels() const { return shape_.channels; }
  std::size_t size() const { return data_.size(); }

  std::span<const double> data() const { return data_; }
  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return data_[shape_.index(y, x, c)];
  }
  double operator[](std::size_t i) const { return data_[i]; }

  /// Clamps every value into [0,1]; NaN is rejected.
  static Image clamped(Shape shape, std::vector<double> data);

  bool operator==(const Image&) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Image-shaped buffer of unconstrained reals (gradients, offsets).
struct Gradient {
  Shape shape;
  std::vector<double> values;

  static Gradient zeros(Shape shape) { return {shape, std::vector<double>(shape.size(), 0.0)}; }
  std::size_t size() const { return values.size(); }
  double max_abs() const;
};

void require_same_shape(const Shape& a, const Shape& b, const char* what);

}  // namespace mlai
