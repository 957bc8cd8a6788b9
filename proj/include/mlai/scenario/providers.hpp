#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "mlai/models/embeddings.hpp"
#include "mlai/scenario/image_client.hpp"
#include "mlai/scenario/prompts.hpp"

namespace mlai {

enum class ProviderKind { Blank, Irrelevant, Matched, External };

std::string_view to_string(ProviderKind k);
/// "blank" | "irrelevant" | "matched" | "external"; throws invalid_argument.
ProviderKind parse_provider_kind(std::string_view s);

struct ImageProvider {
  ProviderKind kind = ProviderKind::Matched;
  Seed seed{0};
  /// Required for External.
  std::shared_ptr<const ImageClient> client;
};

/// blank: constant 0.5. irrelevant: seeded noise from derive_seed(seed,
/// "provider/irrelevant"), independent of the category. matched: the
/// category prototype of `embeddings` painted by paint_prototype. external:
/// the client's PNG resampled to `shape`; raises ProviderUnavailable.
Image provide_image(const ImageProvider& provider, const ScenarioPrompt& prompt, Shape shape,
                    const EmbeddingSet& embeddings);

/// As provide_image, but an unavailable external provider falls back to the
/// matched pattern. `fell_back` reports whether that happened.
Image provide_image_or_matched(const ImageProvider& provider, const ScenarioPrompt& prompt,
                               Shape shape, const EmbeddingSet& embeddings,
                               bool* fell_back = nullptr);

}  // namespace mlai
