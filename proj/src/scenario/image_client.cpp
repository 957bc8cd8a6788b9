#include "mlai/scenario/image_client.hpp"

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

namespace mlai {

ImageClient::ImageClient(std::string endpoint, std::string token, std::size_t max_in_flight,
                         double timeout_seconds)
    : endpoint_(std::move(endpoint)),
      token_(std::move(token)),
      max_in_flight_(max_in_flight),
      timeout_(timeout_seconds) {
  if (max_in_flight_ == 0 || max_in_flight_ > 64) {
    throw std::invalid_argument("image client in-flight limit must be in [1, 64]");
  }
  if (!(timeout_ > 0.0)) throw std::invalid_argument("image client timeout must be > 0");
  const std::string scheme = "http://";
  if (endpoint_.rfind(scheme, 0) != 0) {
    throw std::invalid_argument("image endpoint must start with http://");
  }
  const std::string rest = endpoint_.substr(scheme.size());
  const auto slash = rest.find('/');
  const std::string authority = rest.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : rest.substr(slash);
  const auto colon = authority.rfind(':');
  if (colon != std::string::npos) {
    host_ = authority.substr(0, colon);
    port_ = std::atoi(authority.c_str() + colon + 1);
    if (port_ <= 0 || port_ > 65535) throw std::invalid_argument("bad port in image endpoint");
  } else {
    host_ = authority;
  }
  if (host_.empty()) throw std::invalid_argument("image endpoint has no host");
  slots_ = std::make_unique<std::counting_semaphore<64>>(static_cast<std::ptrdiff_t>(max_in_flight_));
}

ImageClient::~ImageClient() = default;

std::shared_ptr<ImageClient> ImageClient::from_env(std::size_t max_in_flight) {
  const char* ep = std::getenv("MLAI_IMAGE_ENDPOINT");
  if (ep == nullptr || *ep == '\0') return nullptr;
  const char* tok = std::getenv("MLAI_IMAGE_TOKEN");
  return std::make_shared<ImageClient>(ep, tok ? tok : "", max_in_flight);
}

std::vector<std::uint8_t> ImageClient::fetch_png(const std::string& prompt, std::size_t width,
                                                 std::size_t height) const {
  slots_->acquire();
  struct Release {
    std::counting_semaphore<64>* s;
    ~Release() { s->release(); }
  } release{slots_.get()};

  httplib::Client cli(host_, port_);
  const auto secs = static_cast<time_t>(timeout_);
  const auto usecs = static_cast<time_t>((timeout_ - static_cast<double>(secs)) * 1e6);
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
  const nlohmann::json body = {{"prompt", prompt}, {"width", width}, {"height", height}};
  auto res = cli.Post(path_, headers, body.dump(), "application/json");
  if (!res) {
    throw ProviderUnavailable("image endpoint " + endpoint_ + ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw ProviderUnavailable("image endpoint " + endpoint_ + " returned HTTP " +
                              std::to_string(res->status));
  }
  return {res->body.begin(), res->body.end()};
}

}  // namespace mlai
