#include "mlai/models/model_config.hpp"

#include <fstream>
#include <sstream>

#include "internal/yaml_util.hpp"

namespace mlai {

namespace {

std::string position(const std::string& source, int line, int column) {
  if (line <= 0) return source;
  return source + ":" + std::to_string(line) + ":" + std::to_string(column);
}

}  // namespace

ConfigError::ConfigError(const std::string& source, int line, int column,
                         const std::string& message)
    : std::runtime_error(position(source, line, column) + ": " + message),
      line_(line),
      column_(column) {}

namespace detail {

Category category_at(const YAML::Node& node, const std::string& source, const std::string& what) {
  const auto code = scalar_as<std::string>(node, source, what);
  const auto c = parse_category(code);
  if (!c) fail_at(source, node, what + ": unknown scenario code '" + code + "'");
  return *c;
}

EmbeddingSpec embedding_spec_from(const YAML::Node& node, const std::string& source,
                                  const std::string& path) {
  if (node.IsScalar()) {
    const auto preset = node.Scalar();
    if (preset == "default") return EmbeddingSpec{};
    if (preset == "coupled") return coupled_embedding_spec();
    fail_at(source, node, path + ": unknown embedding preset '" + preset + "'");
  }
  MapReader r(node, source, path);
  EmbeddingSpec spec;
  r.read("grid_h", spec.grid_h);
  r.read("grid_w", spec.grid_w);
  r.read("on_fraction", spec.on_fraction);
  r.read("low", spec.low);
  r.read("high", spec.high);
  r.read("max_overlap_fraction", spec.max_overlap_fraction);
  r.read("seed", spec.seed.value);
  if (const auto cs = r.child("couplings")) {
    if (!cs.IsSequence()) fail_at(source, cs, r.name("couplings") + ": expected a list");
    for (const auto& item : cs) {
      MapReader cr(item, source, r.name("couplings[]"));
      EmbeddingCoupling c{category_at(cr.child("a"), source, cr.name("a")),
                          category_at(cr.child("b"), source, cr.name("b")),
                          cr.require<double>("cosine")};
      cr.finish();
      spec.couplings.push_back(c);
    }
  }
  if (const auto ds = r.child("disjoint")) {
    if (!ds.IsSequence()) fail_at(source, ds, r.name("disjoint") + ": expected a list");
    for (const auto& item : ds) {
      if (!item.IsSequence() || item.size() != 2) {
        fail_at(source, item, r.name("disjoint") + ": each entry must be a pair of codes");
      }
      spec.disjoint.push_back({category_at(item[0], source, r.name("disjoint")),
                               category_at(item[1], source, r.name("disjoint"))});
    }
  }
  r.finish();
  return spec;
}

namespace {

ToyVlmConfig toy_from(const YAML::Node& node, const std::string& source, const std::string& path) {
  MapReader r(node, source, path);
  ToyVlmConfig c;
  r.read("height", c.height);
  r.read("width", c.width);
  r.read("channels", c.channels);
  r.read("patch_size", c.patch_size);
  r.read("embed_dim", c.embed_dim);
  r.read("vocab_size", c.vocab_size);
  r.read("harmful_tokens", c.harmful_tokens);
  r.read("scenario_coupling", c.scenario_coupling);
  r.read("texture_gain", c.texture_gain);
  r.read("harm_bias", c.harm_bias);
  r.read("harm_alignment", c.harm_alignment);
  r.read("instruction_scale", c.instruction_scale);
  r.read("visual_scale", c.visual_scale);
  r.read("response_length", c.response_length);
  if (const auto e = r.child("embeddings")) c.embeddings = embedding_spec_from(e, source, r.name("embeddings"));
  r.finish();
  return c;
}

LandscapeSuiteConfig landscape_from(const YAML::Node& node, const std::string& source,
                                    const std::string& path) {
  MapReader r(node, source, path);
  LandscapeSuiteConfig c;
  r.read("height", c.height);
  r.read("width", c.width);
  r.read("channels", c.channels);
  if (const auto s = r.child("sharpness")) {
    if (s.IsScalar()) {
      c.sharpness.fill(scalar_as<double>(s, source, r.name("sharpness")));
    } else {
      MapReader sr(s, source, r.name("sharpness"));
      for (Category cat : kAllCategories) sr.read(std::string(to_code(cat)), c.sharpness[index_of(cat)]);
      sr.finish();
    }
  }
  r.read("depth", c.depth);
  r.read("shift_loss", c.shift_loss);
  r.read("margin", c.margin);
  r.read("temperature", c.temperature);
  r.read("center_offset", c.center_offset);
  if (const auto is = r.child("instruction_shift")) {
    if (!is.IsSequence() || is.size() != 2) {
      fail_at(source, is, r.name("instruction_shift") + ": expected [lo, hi]");
    }
    c.instruction_shift_lo = scalar_as<double>(is[0], source, r.name("instruction_shift"));
    c.instruction_shift_hi = scalar_as<double>(is[1], source, r.name("instruction_shift"));
  }
  if (const auto e = r.child("embeddings")) c.embeddings = embedding_spec_from(e, source, r.name("embeddings"));
  r.finish();
  for (double s : c.sharpness) {
    if (!(s > 0.0)) fail_at(source, node, path + ": sharpness must be > 0");
  }
  if (c.margin <= 0.0 || c.temperature <= 0.0 || c.shift_loss < 0.0 ||
      c.instruction_shift_lo > c.instruction_shift_hi) {
    fail_at(source, node, path + ": margin/temperature must be > 0, shift_loss >= 0, lo <= hi");
  }
  if (c.embeddings.grid_h > c.height || c.embeddings.grid_w > c.width) {
    fail_at(source, node, path + ": image is smaller than the embedding grid");
  }
  return c;
}

}  // namespace

ModelSpec model_spec_from(const YAML::Node& node, const std::string& source,
                          const std::string& path) {
  MapReader r(node, source, path);
  ModelSpec spec;
  if (const auto k = r.child("kind")) {
    const auto kind = scalar_as<std::string>(k, source, r.name("kind"));
    if (kind == "toy-vlm") {
      spec.kind = ModelKind::ToyVlm;
    } else if (kind == "synthetic-landscape") {
      spec.kind = ModelKind::SyntheticLandscape;
    } else {
      fail_at(source, k, r.name("kind") + ": expected toy-vlm or synthetic-landscape");
    }
  }
  r.read("seed", spec.seed.value);
  if (const auto t = r.child("toy_vlm")) spec.toy = toy_from(t, source, r.name("toy_vlm"));
  if (const auto l = r.child("landscape")) spec.landscape = landscape_from(l, source, r.name("landscape"));
  r.finish();
  if (spec.kind == ModelKind::ToyVlm) {
    try {
      (void)ToyVlm(spec.seed, spec.toy);
    } catch (const std::invalid_argument& e) {
      fail_at(source, node, e.what());
    }
  }
  return spec;
}

}  // namespace detail

ModelSpec parse_model_spec(std::string_view yaml_text, const std::string& source) {
  const YAML::Node doc = detail::load_document(std::string(yaml_text), source);
  return detail::model_spec_from(doc, source, "");
}

ModelSpec load_model_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, 0, 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model_spec(ss.str(), path);
}

}  // namespace mlai
