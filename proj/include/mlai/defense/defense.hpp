#pragma once

#include <cstddef>
#include <deque>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mlai/collab/collab.hpp"

namespace mlai {

struct DefenseConfig {
  /// Cosine at or above which an image counts as a duplicate. 0 rejects
  /// everything after the first admitted image.
  double similarity_threshold = 0.95;
  std::size_t grid_h = 8;
  std::size_t grid_w = 8;
  std::size_t history_capacity = 1024;
};

void validate_defense_config(const DefenseConfig& cfg);

/// Bounded FIFO of fingerprints.
class FingerprintHistory {
 public:
  explicit FingerprintHistory(std::size_t capacity);

  void push(FeatureVector fp);
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<FeatureVector>& entries() const { return entries_; }

 private:
  std::size_t capacity_;
  std::deque<FeatureVector> entries_;
};

struct FilterResult {
  std::vector<std::size_t> admitted_indices;
  std::size_t rejected_count = 0;
  std::size_t rejected_by_history = 0;
  std::size_t rejected_by_batch = 0;
  /// Largest similarity seen in any comparison; empty when nothing was compared.
  std::optional<double> max_similarity;
};

/// Walks `images` in order. Each fingerprint is compared with every history
/// entry and every image already admitted from this batch; a similarity >=
/// threshold rejects it. Admitted fingerprints are appended to the history.
FilterResult filter_batch(FingerprintHistory& hist, std::span<const Image> images,
                          const DefenseConfig& cfg);

struct DefendedResult {
  double undefended_asr = 0.0;
  double defended_asr = 0.0;
  /// undefended - defended, as a fraction (x100 for percentage points).
  double reduction = 0.0;
  std::size_t set_size = 0;
  std::size_t admitted = 0;
  FilterResult filter;
  std::vector<AttackOutcome> undefended;
  std::vector<AttackOutcome> defended;
};

/// Filters the set against a fresh history, then attacks with the full set
/// and with the admitted subset.
DefendedResult defended_attack(const TargetModel& model, const CandidateSet& set,
                               std::span<const Instruction> instrs, const Judge& j,
                               const DefenseConfig& cfg);

/// JSON-lines log: {"batch_id", "admitted", "rejected", "max_similarity",
/// "rejected_by_history", "rejected_by_batch"}.
void write_defense_event(std::ostream& out, const std::string& batch_id, const FilterResult& r);

}  // namespace mlai
