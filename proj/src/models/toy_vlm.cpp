#include "mlai/models/toy_vlm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mlai {

struct ToyVlm::Features {
  std::vector<double> f;          // patch grey means
  double texture = 0.0;
  std::vector<double> texture_grad;
  std::vector<double> visual;     // E (f - 1/2)
  std::array<double, kCategoryCount> alignment{};
};

namespace {

void log_softmax_inplace(std::vector<double>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  const double lse = m + std::log(s);
  for (double& v : z) v -= lse;
}

}  // namespace

std::vector<std::string> tokenize_words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

ToyVlm::ToyVlm(Seed seed, const ToyVlmConfig& cfg) : seed_(seed), cfg_(cfg) {
  validate_shape(input_shape());
  if (cfg_.patch_size == 0 || cfg_.height % cfg_.patch_size != 0 ||
      cfg_.width % cfg_.patch_size != 0) {
    throw std::invalid_argument("toy-vlm: patch_size must divide height and width");
  }
  if (cfg_.embed_dim == 0 || cfg_.embed_dim > 64) {
    throw std::invalid_argument("toy-vlm: embed_dim must be in [1, 64]");
  }
  if (cfg_.vocab_size < 2 || cfg_.vocab_size > 256) {
    throw std::invalid_argument("toy-vlm: vocab_size must be in [2, 256]");
  }
  if (cfg_.harmful_tokens == 0 || cfg_.harmful_tokens >= cfg_.vocab_size) {
    throw std::invalid_argument("toy-vlm: harmful_tokens must be in [1, vocab_size)");
  }
  if (cfg_.scenario_coupling < 0.0 || cfg_.texture_gain < 0.0 || cfg_.response_length == 0) {
    throw std::invalid_argument("toy-vlm: coupling and texture gain must be >= 0");
  }
  grid_h_ = cfg_.height / cfg_.patch_size;
  grid_w_ = cfg_.width / cfg_.patch_size;
  const std::size_t patches = grid_h_ * grid_w_;
  const std::size_t d = cfg_.embed_dim;
  const std::size_t v = cfg_.vocab_size;

  SplitMix64 rng(derive_seed(seed, "toy-vlm/weights"));
  embed_.resize(d * patches);
  const double es = cfg_.visual_scale / std::sqrt(static_cast<double>(patches));
  for (double& w : embed_) w = es * rng.normal();

  harm_dir_.resize(d);
  double norm = 0.0;
  for (double& w : harm_dir_) {
    w = rng.normal();
    norm += w * w;
  }
  norm = std::sqrt(norm);
  for (double& w : harm_dir_) w /= norm;

  readout_.resize(v * d);
  const double rs = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t t = 0; t < v; ++t) {
    for (std::size_t k = 0; k < d; ++k) {
      double w = rs * rng.normal();
      if (t < cfg_.harmful_tokens) w += cfg_.harm_alignment * harm_dir_[k];
      readout_[t * d + k] = w;
    }
  }
  bias_.assign(v, 0.0);
  for (std::size_t t = 0; t < cfg_.harmful_tokens; ++t) bias_[t] = -cfg_.harm_bias;
  text_salt_ = derive_seed(seed, "toy-vlm/text").value;

  EmbeddingSpec spec = cfg_.embeddings;
  spec.grid_h = grid_h_;
  spec.grid_w = grid_w_;
  embeddings_ = make_embeddings(spec);
  for (Category c : kAllCategories) {
    const auto p = embeddings_[c].values();
    const double mean = std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
    std::vector<double> e(p.size());
    double n2 = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      e[i] = p[i] - mean;
      n2 += e[i] * e[i];
    }
    const double n = std::sqrt(n2);
    if (n > 0.0) {
      for (double& x : e) x /= n;
    }
    centered_[index_of(c)] = std::move(e);
  }
}

ToyVlm::Features ToyVlm::features(const Image& image) const {
  Features out;
  const std::size_t p = cfg_.patch_size;
  const std::size_t c = cfg_.channels;
  const double inv = 1.0 / static_cast<double>(p * p * c);
  out.f.assign(grid_h_ * grid_w_, 0.0);
  for (std::size_t y = 0; y < cfg_.height; ++y)
    for (std::size_t x = 0; x < cfg_.width; ++x)
      for (std::size_t ch = 0; ch < c; ++ch)
        out.f[(y / p) * grid_w_ + x / p] += image.at(y, x, ch);
  for (double& v : out.f) v *= inv;

  const std::size_t edges = grid_h_ * (grid_w_ - 1) + (grid_h_ - 1) * grid_w_;
  out.texture_grad.assign(out.f.size(), 0.0);
  if (edges > 0) {
    const double scale = 1.0 / static_cast<double>(edges);
    auto edge = [&](std::size_t a, std::size_t b) {
      const double diff = out.f[a] - out.f[b];
      out.texture += diff * diff * scale;
      out.texture_grad[a] += 2.0 * diff * scale;
      out.texture_grad[b] -= 2.0 * diff * scale;
    };
    for (std::size_t gy = 0; gy < grid_h_; ++gy) {
      for (std::size_t gx = 0; gx < grid_w_; ++gx) {
        const std::size_t j = gy * grid_w_ + gx;
        if (gx + 1 < grid_w_) edge(j, j + 1);
        if (gy + 1 < grid_h_) edge(j, j + grid_w_);
      }
    }
  }

  const std::size_t d = cfg_.embed_dim;
  out.visual.assign(d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < out.f.size(); ++j) s += embed_[k * out.f.size() + j] * (out.f[j] - 0.5);
    out.visual[k] = s;
  }
  for (Category cat : kAllCategories) {
    const auto& e = centered_[index_of(cat)];
    double s = 0.0;
    for (std::size_t j = 0; j < e.size(); ++j) s += e[j] * out.f[j];
    out.alignment[index_of(cat)] = s;
  }
  return out;
}

std::vector<double> ToyVlm::instruction_features(const Instruction& instruction) const {
  std::vector<double> phi(cfg_.embed_dim, 0.0);
  const auto words = tokenize_words(instruction.text);
  if (words.empty()) return phi;
  const double scale = cfg_.instruction_scale / std::sqrt(static_cast<double>(words.size()));
  for (const auto& w : words) {
    const std::uint64_t h = mix64(fnv1a(w) ^ text_salt_);
    const std::size_t idx = h % cfg_.embed_dim;
    phi[idx] += ((h >> 63) != 0U ? -scale : scale);
  }
  return phi;
}

std::vector<double> ToyVlm::log_probs(const Features& feat, const Instruction& instruction) const {
  const std::size_t d = cfg_.embed_dim;
  const double drive = cfg_.scenario_coupling * feat.alignment[index_of(instruction.category)] +
                       cfg_.texture_gain * feat.texture;
  std::vector<double> h = instruction_features(instruction);
  for (std::size_t k = 0; k < d; ++k) h[k] += feat.visual[k] + drive * harm_dir_[k];
  std::vector<double> z(cfg_.vocab_size);
  for (std::size_t t = 0; t < z.size(); ++t) {
    double s = bias_[t];
    for (std::size_t k = 0; k < d; ++k) s += readout_[t * d + k] * h[k];
    z[t] = s;
  }
  log_softmax_inplace(z);
  return z;
}

LossAndGrad ToyVlm::evaluate(const Image& image, std::span<const Instruction> batch,
                             const TargetCorpus& corpus, bool with_grad) const {
  const Features feat = features(image);
  std::vector<double> counts(cfg_.vocab_size, 0.0);
  for (const auto& entry : corpus.entries())
    for (std::size_t tok : entry) counts[tok] += 1.0;
  const auto total = static_cast<double>(corpus.total_tokens());

  const std::size_t d = cfg_.embed_dim;
  double loss = 0.0;
  std::vector<double> r_sum(d, 0.0);
  std::array<double, kCategoryCount> drive_by_cat{};
  double drive_total = 0.0;

  for (const auto& instr : batch) {
    const auto lp = log_probs(feat, instr);
    for (std::size_t t = 0; t < lp.size(); ++t) loss -= counts[t] * lp[t];
    if (!with_grad) continue;
    // dL/dz_t = total * p_t - count_t ; r = U^T dL/dz
    std::vector<double> r(d, 0.0);
    for (std::size_t t = 0; t < lp.size(); ++t) {
      const double dz = total * std::exp(lp[t]) - counts[t];
      for (std::size_t k = 0; k < d; ++k) r[k] += readout_[t * d + k] * dz;
    }
    double ur = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      r_sum[k] += r[k];
      ur += harm_dir_[k] * r[k];
    }
    drive_by_cat[index_of(instr.category)] += ur;
    drive_total += ur;
  }

  LossAndGrad out{loss, Gradient::zeros(input_shape())};
  if (!with_grad) return out;

  const std::size_t patches = feat.f.size();
  std::vector<double> df(patches, 0.0);
  for (std::size_t j = 0; j < patches; ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += embed_[k * patches + j] * r_sum[k];
    s += cfg_.texture_gain * drive_total * feat.texture_grad[j];
    df[j] = s;
  }
  for (Category cat : kAllCategories) {
    const double w = cfg_.scenario_coupling * drive_by_cat[index_of(cat)];
    if (w == 0.0) continue;
    const auto& e = centered_[index_of(cat)];
    for (std::size_t j = 0; j < patches; ++j) df[j] += w * e[j];
  }
  const std::size_t p = cfg_.patch_size;
  const double inv = 1.0 / static_cast<double>(p * p * cfg_.channels);
  const Shape shape = input_shape();
  for (std::size_t y = 0; y < cfg_.height; ++y)
    for (std::size_t x = 0; x < cfg_.width; ++x)
      for (std::size_t ch = 0; ch < cfg_.channels; ++ch)
        out.grad.values[shape.index(y, x, ch)] = df[(y / p) * grid_w_ + x / p] * inv;
  return out;
}

double ToyVlm::do_loss(const Image& image, std::span<const Instruction> batch,
                       const TargetCorpus& corpus) const {
  return evaluate(image, batch, corpus, false).loss;
}

LossAndGrad ToyVlm::do_loss_and_grad(const Image& image, std::span<const Instruction> batch,
                                     const TargetCorpus& corpus) const {
  return evaluate(image, batch, corpus, true);
}

std::vector<double> ToyVlm::token_distribution(const Image& image,
                                               const Instruction& instruction) const {
  require_same_shape(image.shape(), input_shape(), "toy-vlm input");
  auto lp = log_probs(features(image), instruction);
  for (double& v : lp) v = std::exp(v);
  return lp;
}

Response ToyVlm::do_respond(const Image& image, const Instruction& instruction) const {
  const auto probs = token_distribution(image, instruction);
  Response r;
  for (std::size_t t = 0; t < cfg_.harmful_tokens; ++t) r.harm_score += probs[t];
  r.harm_score = std::clamp(r.harm_score, 0.0, 1.0);
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  const std::size_t n = std::min(cfg_.response_length, order.size());
  r.token_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));
  return r;
}

std::shared_ptr<const ToyVlm> make_toy_vlm(Seed seed, const ToyVlmConfig& cfg) {
  return std::make_shared<const ToyVlm>(seed, cfg);
}

TargetCorpus default_corpus(std::size_t harmful_tokens) {
  std::vector<std::vector<std::size_t>> entries;
  for (std::size_t t = 0; t < harmful_tokens; t += 3) {
    std::vector<std::size_t> e;
    for (std::size_t k = t; k < std::min(t + 3, harmful_tokens); ++k) e.push_back(k);
    entries.push_back(std::move(e));
  }
  return TargetCorpus(std::move(entries));
}

}  // namespace mlai
