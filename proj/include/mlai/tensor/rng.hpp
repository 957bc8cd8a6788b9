#pragma once

#include <cstdint>
#include <string_view>

namespace mlai {

struct Seed {
  std::uint64_t value = 0;
  bool operator==(const Seed&) const = default;
};

/// SplitMix64 (Steele, Lea & Flood 2014): state += 0x9E3779B97F4A7C15, then the
/// standard xor-shift-multiply finalizer. Every seeded artifact draws from it.
class SplitMix64 {
 public:
  explicit SplitMix64(Seed seed) : state_(seed.value) {}

  std::uint64_t next();
  /// Uniform in [0,1): top 53 bits scaled by 2^-53.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller on two uniforms (no cached second value).
  double normal();
  /// Uniform integer in [0, n) by rejection, n >= 1.
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t state_;
};

/// The SplitMix64 finalizer applied to a single word.
std::uint64_t mix64(std::uint64_t x);

/// Independent child seed for a named stream; the derivation is part of the
/// reproducibility contract: mix64(seed ^ mix64(fnv1a(tag) + index)).
Seed derive_seed(Seed parent, std::string_view tag, std::uint64_t index = 0);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace mlai
