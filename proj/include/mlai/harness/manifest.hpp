#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace mlai {

/// Lower-case hex SHA-256 of the file's raw bytes; the canonical config hash.
std::string file_sha256(const std::filesystem::path& path);
std::string sha256_hex(const std::string& bytes);

/// Writes to "<path>.tmp" then renames over `path`.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

/// {"command", "config_path", "config_sha256", "tool_version", "created_utc",
///  "artifacts": [...], "stages": {name: seconds}, "notes": {key: value}}
class RunManifest {
 public:
  RunManifest(std::string command, const std::filesystem::path& config_path);

  void add_artifact(const std::filesystem::path& p) { artifacts_.push_back(p.string()); }
  void note(const std::string& key, const std::string& value) { notes_[key] = value; }
  void begin_stage(const std::string& name);
  void end_stage();

  const std::vector<std::string>& artifacts() const { return artifacts_; }
  const std::string& config_hash() const { return config_hash_; }
  std::string to_json() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::string command_;
  std::string config_path_;
  std::string config_hash_;
  std::vector<std::string> artifacts_;
  std::vector<std::pair<std::string, double>> stages_;
  std::map<std::string, std::string> notes_;
  std::string open_stage_;
  std::chrono::steady_clock::time_point stage_start_;
};

const char* tool_version();

}  // namespace mlai
