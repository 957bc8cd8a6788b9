#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "mlai/models/landscape.hpp"
#include "mlai/models/toy_vlm.hpp"

namespace mlai {

/// Configuration problem with the 1-based position it was found at
/// (line 0 when the position is unknown).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, int column, const std::string& message);

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct ModelSpec {
  ModelKind kind = ModelKind::ToyVlm;
  Seed seed{7};
  ToyVlmConfig toy;
  LandscapeSuiteConfig landscape;
};

/// Schema:
///   kind: toy-vlm | synthetic-landscape
///   seed: <u64>
///   toy_vlm:   { height, width, channels, patch_size, embed_dim, vocab_size,
///                harmful_tokens, scenario_coupling, texture_gain, harm_bias,
///                harm_alignment, instruction_scale, visual_scale,
///                response_length, embeddings }
///   landscape: { height, width, channels, sharpness (scalar or per-code map),
///                depth, shift_loss, margin, temperature, center_offset,
///                instruction_shift: [lo, hi], embeddings }
///   embeddings: default | coupled | { grid_h, grid_w, on_fraction, low, high,
///                max_overlap_fraction, seed, couplings: [{a, b, cosine}],
///                disjoint: [[a, b]] }
/// Unknown keys are rejected.
ModelSpec parse_model_spec(std::string_view yaml_text, const std::string& source = "<string>");
ModelSpec load_model_spec(const std::string& path);

}  // namespace mlai
