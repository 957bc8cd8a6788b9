#include "mlai/models/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mlai {

Gradient fd_gradient(const TargetModel& model, const Image& image,
                     std::span<const Instruction> batch, const TargetCorpus& corpus, double h) {
  if (!(h > 0.0 && h < 0.5)) throw std::invalid_argument("fd step must lie in (0, 0.5)");
  Gradient g = Gradient::zeros(image.shape());
  std::vector<double> probe(image.data().begin(), image.data().end());
  auto eval = [&](std::size_t i, double v) {
    const double saved = probe[i];
    probe[i] = v;
    const double l = model.loss(Image(image.shape(), probe), batch, corpus);
    probe[i] = saved;
    return l;
  };
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double x = probe[i];
    if (x - h < 0.0) {
      g.values[i] = (eval(i, x + h) - eval(i, x)) / h;
    } else if (x + h > 1.0) {
      g.values[i] = (eval(i, x) - eval(i, x - h)) / h;
    } else {
      g.values[i] = (eval(i, x + h) - eval(i, x - h)) / (2.0 * h);
    }
  }
  return g;
}

double gradient_relative_error(const Gradient& a, const Gradient& b) {
  require_same_shape(a.shape, b.shape, "gradient comparison");
  const double scale = std::max(a.max_abs(), b.max_abs());
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
  }
  return worst / scale;
}

}  // namespace mlai
