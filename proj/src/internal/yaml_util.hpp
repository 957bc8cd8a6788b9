#pragma once

#include <set>
#include <string>
#include <utility>

#include <yaml-cpp/yaml.h>

#include "mlai/models/model_config.hpp"

namespace mlai::detail {

[[noreturn]] inline void fail_at(const std::string& source, const YAML::Mark& mark,
                                 const std::string& message) {
  if (mark.is_null()) throw ConfigError(source, 0, 0, message);
  throw ConfigError(source, mark.line + 1, mark.column + 1, message);
}

[[noreturn]] inline void fail_at(const std::string& source, const YAML::Node& node,
                                 const std::string& message) {
  fail_at(source, node.Mark(), message);
}

template <class T>
T scalar_as(const YAML::Node& node, const std::string& source, const std::string& what) {
  if (!node.IsScalar()) fail_at(source, node, what + ": expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail_at(source, node, what + ": cannot parse '" + node.Scalar() + "'");
  }
}

/// Reads keys from one mapping and rejects any key that was never asked for.
class MapReader {
 public:
  MapReader(YAML::Node node, std::string source, std::string path)
      : node_(std::move(node)), source_(std::move(source)), path_(std::move(path)) {
    if (!node_.IsMap()) fail_at(source_, node_, where() + ": expected a mapping");
  }

  bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

  YAML::Node child(const std::string& key) {
    seen_.insert(key);
    return node_[key];
  }

  template <class T>
  void read(const std::string& key, T& out) {
    const YAML::Node n = child(key);
    if (n) out = scalar_as<T>(n, source_, name(key));
  }

  template <class T>
  T require(const std::string& key) {
    const YAML::Node n = child(key);
    if (!n) fail_at(source_, node_, where() + ": missing required key '" + key + "'");
    return scalar_as<T>(n, source_, name(key));
  }

  void finish() const {
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) fail_at(source_, kv.first, "unknown key '" + name(key) + "'");
    }
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const std::string& source() const { return source_; }
  const YAML::Node& node() const { return node_; }

 private:
  std::string where() const { return path_.empty() ? "document" : path_; }

  YAML::Node node_;
  std::string source_;
  std::string path_;
  std::set<std::string> seen_;
};

/// Parses a whole document, converting syntax errors to ConfigError.
inline YAML::Node load_document(const std::string& text, const std::string& source) {
  try {
    return YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    fail_at(source, e.mark, e.msg);
  }
}

Category category_at(const YAML::Node& node, const std::string& source, const std::string& what);
EmbeddingSpec embedding_spec_from(const YAML::Node& node, const std::string& source,
                                  const std::string& path);
ModelSpec model_spec_from(const YAML::Node& node, const std::string& source,
                          const std::string& path);

}  // namespace mlai::detail
