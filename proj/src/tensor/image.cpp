#include "mlai/tensor/image.hpp"

#include <algorithm>
#include <cmath>

namespace mlai {

std::string Shape::str() const {
  return std::to_string(height) + "x" + std::to_string(width) + "x" + std::to_string(channels);
}

void validate_shape(const Shape& shape) {
  if (shape.height == 0 || shape.width == 0 || shape.channels == 0) {
    throw std::invalid_argument("image dimensions must be >= 1, got " + shape.str());
  }
  if (shape.height > kMaxImageSide || shape.width > kMaxImageSide ||
      shape.channels > kMaxChannels) {
    throw std::invalid_argument("image dimensions exceed 256x256x4, got " + shape.str());
  }
}

Image::Image(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
  validate_shape(shape_);
  if (data_.size() != shape_.size()) {
    throw std::invalid_argument("image data length " + std::to_string(data_.size()) +
                                " does not match shape " + shape_.str());
  }
  for (double v : data_) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw std::invalid_argument("image pixel outside [0,1]: " + std::to_string(v));
    }
  }
}

Image Image::clamped(Shape shape, std::vector<double> data) {
  for (double& v : data) {
    if (std::isnan(v)) throw std::invalid_argument("image pixel is NaN");
    v = std::clamp(v, 0.0, 1.0);
  }
  return Image(shape, std::move(data));
}

double Gradient::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

void require_same_shape(const Shape& a, const Shape& b, const char* what) {
  if (!(a == b)) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch " + a.str() + " vs " +
                                b.str());
  }
}

}  // namespace mlai
