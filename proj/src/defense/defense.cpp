#include "mlai/defense/defense.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace mlai {

void validate_defense_config(const DefenseConfig& cfg) {
  if (!(cfg.similarity_threshold >= 0.0 && cfg.similarity_threshold <= 1.0)) {
    throw std::invalid_argument("similarity threshold must lie in [0,1]");
  }
  if (cfg.grid_h == 0 || cfg.grid_w == 0) throw std::invalid_argument("fingerprint grid must be >= 1");
  if (cfg.history_capacity == 0) throw std::invalid_argument("history capacity must be >= 1");
}

FingerprintHistory::FingerprintHistory(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("history capacity must be >= 1");
}

void FingerprintHistory::push(FeatureVector fp) {
  if (entries_.size() == capacity_) entries_.pop_front();
  entries_.push_back(std::move(fp));
}

FilterResult filter_batch(FingerprintHistory& hist, std::span<const Image> images,
                          const DefenseConfig& cfg) {
  validate_defense_config(cfg);
  FilterResult r;
  std::vector<FeatureVector> admitted;
  auto note = [&](double s) { r.max_similarity = std::max(r.max_similarity.value_or(s), s); };
  for (std::size_t i = 0; i < images.size(); ++i) {
    FeatureVector fp = downsample_gray(images[i], cfg.grid_h, cfg.grid_w);
    bool by_history = false;
    bool by_batch = false;
    for (const auto& h : hist.entries()) {
      const double s = cosine_similarity(fp, h);
      note(s);
      by_history = by_history || s >= cfg.similarity_threshold;
    }
    for (const auto& a : admitted) {
      const double s = cosine_similarity(fp, a);
      note(s);
      by_batch = by_batch || s >= cfg.similarity_threshold;
    }
    if (by_history || by_batch) {
      ++r.rejected_count;
      if (by_history) ++r.rejected_by_history;
      else ++r.rejected_by_batch;
    } else {
      r.admitted_indices.push_back(i);
      admitted.push_back(std::move(fp));
    }
  }
  for (auto& fp : admitted) hist.push(std::move(fp));
  return r;
}

DefendedResult defended_attack(const TargetModel& model, const CandidateSet& set,
                               std::span<const Instruction> instrs, const Judge& j,
                               const DefenseConfig& cfg) {
  if (set.members.empty()) throw std::invalid_argument("defended attack on an empty set");
  if (instrs.empty()) throw std::invalid_argument("defended attack needs instructions");
  FingerprintHistory hist(cfg.history_capacity);
  std::vector<Image> images;
  for (const auto& c : set.members) images.push_back(c.image);

  DefendedResult out;
  out.filter = filter_batch(hist, images, cfg);
  CandidateSet kept;
  kept.min_iteration = set.min_iteration;
  for (std::size_t i : out.filter.admitted_indices) kept.members.push_back(set.members[i]);
  if (kept.members.empty()) {
    const auto first = std::min_element(set.members.begin(), set.members.end(),
                                        [](const Candidate& a, const Candidate& b) {
                                          return a.iteration < b.iteration;
                                        });
    kept.members.push_back(*first);
  }
  out.set_size = set.members.size();
  out.admitted = kept.members.size();
  for (const auto& in : instrs) {
    out.undefended.push_back(collaborative_attack(model, set, in, j));
    out.defended.push_back(collaborative_attack(model, kept, in, j));
  }
  out.undefended_asr = compute_asr(out.undefended);
  out.defended_asr = compute_asr(out.defended);
  out.reduction = out.undefended_asr - out.defended_asr;
  return out;
}

void write_defense_event(std::ostream& out, const std::string& batch_id, const FilterResult& r) {
  nlohmann::json j = {{"batch_id", batch_id},
                      {"admitted", r.admitted_indices.size()},
                      {"rejected", r.rejected_count},
                      {"max_similarity", nullptr},
                      {"rejected_by_history", r.rejected_by_history},
                      {"rejected_by_batch", r.rejected_by_batch}};
  if (r.max_similarity) j["max_similarity"] = *r.max_similarity;
  out << j.dump() << '\n';
}

}  // namespace mlai
