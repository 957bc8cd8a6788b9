#include "mlai/harness/manifest.hpp"

#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>
#include <openssl/evp.h>

namespace mlai {

const char* tool_version() { return MLAI_VERSION; }

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::string file_sha256(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

RunManifest::RunManifest(std::string command, const std::filesystem::path& config_path)
    : command_(std::move(command)),
      config_path_(config_path.string()),
      config_hash_(file_sha256(config_path)) {}

void RunManifest::begin_stage(const std::string& name) {
  if (!open_stage_.empty()) end_stage();
  open_stage_ = name;
  stage_start_ = std::chrono::steady_clock::now();
}

void RunManifest::end_stage() {
  if (open_stage_.empty()) return;
  const std::chrono::duration<double> d = std::chrono::steady_clock::now() - stage_start_;
  stages_.emplace_back(open_stage_, d.count());
  open_stage_.clear();
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json stages = nlohmann::ordered_json::object();
  for (const auto& [k, v] : stages_) stages[k] = v;
  char stamp[32];
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  nlohmann::ordered_json j = {{"command", command_},
                              {"config_path", config_path_},
                              {"config_sha256", config_hash_},
                              {"tool_version", tool_version()},
                              {"created_utc", stamp},
                              {"artifacts", artifacts_},
                              {"stages", stages},
                              {"notes", notes_}};
  return j.dump(2) + "\n";
}

void RunManifest::write(const std::filesystem::path& path) const { write_text_atomic(path, to_json()); }

}  // namespace mlai
