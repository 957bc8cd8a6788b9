#include "mlai/models/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mlai {

SyntheticLandscape::SyntheticLandscape(LandscapeSpec spec) : spec_(std::move(spec)) {
  if (spec_.minima.empty()) throw std::invalid_argument("landscape needs at least one minimum");
  shape_ = spec_.minima.front().center.shape();
  for (const auto& m : spec_.minima) {
    require_same_shape(m.center.shape(), shape_, "landscape minimum");
    if (!(m.sharpness > 0.0) || !std::isfinite(m.sharpness)) {
      throw std::invalid_argument("landscape sharpness must be positive and finite");
    }
    if (!std::isfinite(m.depth)) throw std::invalid_argument("landscape depth must be finite");
  }
  if (spec_.shift) {
    require_same_shape(spec_.shift->shape, shape_, "landscape shift");
    for (double v : spec_.shift->values) {
      if (!std::isfinite(v)) throw std::invalid_argument("landscape shift must be finite");
    }
  }
  if (!(spec_.temperature > 0.0)) throw std::invalid_argument("landscape temperature must be > 0");
  if (!(spec_.instruction_shift_lo <= spec_.instruction_shift_hi)) {
    throw std::invalid_argument("landscape instruction shift range is empty");
  }
  embeddings_ = make_embeddings(spec_.embeddings);
}

std::pair<double, std::size_t> SyntheticLandscape::active(const Image& image, double scale) const {
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  const auto x = image.data();
  for (std::size_t m = 0; m < spec_.minima.size(); ++m) {
    const auto& mn = spec_.minima[m];
    const auto c = mn.center.data();
    double sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double s = spec_.shift ? scale * spec_.shift->values[i] : 0.0;
      const double d = x[i] - c[i] - s;
      sq += d * d;
    }
    const double v = mn.depth + mn.sharpness * sq;
    if (v < best) {
      best = v;
      arg = m;
    }
  }
  return {best, arg};
}

double SyntheticLandscape::shifted_loss(const Image& image, double scale) const {
  require_same_shape(image.shape(), shape_, "landscape input");
  return active(image, scale).first;
}

double SyntheticLandscape::instruction_shift_scale(const Instruction& instruction) const {
  const double lo = spec_.instruction_shift_lo;
  const double hi = spec_.instruction_shift_hi;
  if (lo == hi) return lo;
  const std::uint64_t h = mix64(fnv1a(instruction.id) ^ mix64(spec_.salt));
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

double SyntheticLandscape::do_loss(const Image& image, std::span<const Instruction>,
                                   const TargetCorpus&) const {
  return active(image, 1.0).first;
}

LossAndGrad SyntheticLandscape::do_loss_and_grad(const Image& image, std::span<const Instruction>,
                                                 const TargetCorpus&) const {
  const auto [loss, m] = active(image, 1.0);
  LossAndGrad out{loss, Gradient::zeros(shape_)};
  const auto& mn = spec_.minima[m];
  const auto x = image.data();
  const auto c = mn.center.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = spec_.shift ? spec_.shift->values[i] : 0.0;
    out.grad.values[i] = 2.0 * mn.sharpness * (x[i] - c[i] - s);
  }
  return out;
}

Response SyntheticLandscape::do_respond(const Image& image, const Instruction& instruction) const {
  const double l = active(image, instruction_shift_scale(instruction)).first;
  const double z = (spec_.harm_level - l) / spec_.temperature;
  Response r;
  r.harm_score = 1.0 / (1.0 + std::exp(-z));
  r.token_indices = {r.harm_score >= 0.5 ? std::size_t{1} : std::size_t{0}};
  return r;
}

std::shared_ptr<const SyntheticLandscape> make_synthetic_landscape(LandscapeSpec spec) {
  return std::make_shared<const SyntheticLandscape>(std::move(spec));
}

LandscapeSuiteConfig LandscapeSuiteConfig::uniform(double sharpness) {
  LandscapeSuiteConfig cfg;
  cfg.sharpness.fill(sharpness);
  return cfg;
}

LandscapeCell make_landscape_cell(const LandscapeSuiteConfig& cfg, Category category, Seed seed,
                                  const Image& init) {
  const Shape shape{cfg.height, cfg.width, cfg.channels};
  require_same_shape(init.shape(), shape, "landscape cell initial image");
  const double s = cfg.sharpness[index_of(category)];
  if (!(s > 0.0)) throw std::invalid_argument("suite sharpness must be > 0");
  if (cfg.shift_loss < 0.0 || cfg.margin <= 0.0) {
    throw std::invalid_argument("suite shift_loss must be >= 0 and margin > 0");
  }

  SplitMix64 rng(derive_seed(seed, "landscape/center", index_of(category)));
  const double r = cfg.center_offset * cfg.eps;
  std::vector<double> c(shape.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = init[i] + rng.uniform(-r, r);
  Image center = Image::clamped(shape, std::move(c));

  std::vector<double> dir(shape.size());
  double norm = 0.0;
  for (std::size_t i = 0; i < dir.size(); ++i) {
    dir[i] = init[i] - center[i];
    norm += dir[i] * dir[i];
  }
  norm = std::sqrt(norm);
  const double mag = std::sqrt(cfg.shift_loss / s);
  Gradient shift = Gradient::zeros(shape);
  if (norm > 0.0) {
    for (std::size_t i = 0; i < dir.size(); ++i) shift.values[i] = mag * dir[i] / norm;
  }

  LandscapeSpec base;
  base.minima = {{center, cfg.depth, s}};
  base.harm_level = cfg.depth + cfg.margin;
  base.temperature = cfg.temperature;
  base.instruction_shift_lo = cfg.instruction_shift_lo;
  base.instruction_shift_hi = cfg.instruction_shift_hi;
  base.salt = derive_seed(seed, "landscape/instructions", index_of(category)).value;
  base.embeddings = cfg.embeddings;

  LandscapeSpec shifted = base;
  shifted.shift = std::move(shift);
  return {make_synthetic_landscape(std::move(base)), make_synthetic_landscape(std::move(shifted))};
}

}  // namespace mlai
