#include "mlai/scenario/providers.hpp"

#include <stdexcept>

#include "mlai/tensor/image_io.hpp"

namespace mlai {

std::string_view to_string(ProviderKind k) {
  switch (k) {
    case ProviderKind::Blank: return "blank";
    case ProviderKind::Irrelevant: return "irrelevant";
    case ProviderKind::Matched: return "matched";
    case ProviderKind::External: return "external";
  }
  return "unknown";
}

ProviderKind parse_provider_kind(std::string_view s) {
  if (s == "blank") return ProviderKind::Blank;
  if (s == "irrelevant") return ProviderKind::Irrelevant;
  if (s == "matched") return ProviderKind::Matched;
  if (s == "external") return ProviderKind::External;
  throw std::invalid_argument("unknown provider kind '" + std::string(s) + "'");
}

Image provide_image(const ImageProvider& provider, const ScenarioPrompt& prompt, Shape shape,
                    const EmbeddingSet& embeddings) {
  validate_shape(shape);
  switch (provider.kind) {
    case ProviderKind::Blank:
      return new_image(shape.height, shape.width, shape.channels, 0.5);
    case ProviderKind::Irrelevant:
      return seeded_noise(derive_seed(provider.seed, "provider/irrelevant"), shape.height,
                          shape.width, shape.channels);
    case ProviderKind::Matched:
      return paint_prototype(embeddings, prompt.category, shape);
    case ProviderKind::External: {
      if (!provider.client) throw ProviderUnavailable("external provider has no image client");
      const auto png = provider.client->fetch_png(prompt.template_text, shape.width, shape.height);
      Image img = [&] {
        try {
          return decode_png(png);
        } catch (const std::exception& e) {
          throw ProviderUnavailable(std::string("external image undecodable: ") + e.what());
        }
      }();
      return resample_nearest(img, shape);
    }
  }
  throw std::invalid_argument("unknown provider kind");
}

Image provide_image_or_matched(const ImageProvider& provider, const ScenarioPrompt& prompt,
                               Shape shape, const EmbeddingSet& embeddings, bool* fell_back) {
  if (fell_back) *fell_back = false;
  try {
    return provide_image(provider, prompt, shape, embeddings);
  } catch (const ProviderUnavailable&) {
    if (provider.kind != ProviderKind::External) throw;
    if (fell_back) *fell_back = true;
    return paint_prototype(embeddings, prompt.category, shape);
  }
}

}  // namespace mlai
