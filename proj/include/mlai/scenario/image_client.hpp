#pragma once

#include <cstdint>
#include <memory>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlai {

class ProviderUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Client for an external text-to-image service:
///   POST <endpoint> with JSON {"prompt": ..., "width": W, "height": H}
///   and optional "Authorization: Bearer <token>"; a 200 reply carries PNG bytes.
/// Plain http:// endpoints only. At most `max_in_flight` requests run at once.
class ImageClient {
 public:
  ImageClient(std::string endpoint, std::string token, std::size_t max_in_flight = 2,
              double timeout_seconds = 30.0);
  ~ImageClient();

  /// MLAI_IMAGE_ENDPOINT / MLAI_IMAGE_TOKEN; null when no endpoint is set.
  static std::shared_ptr<ImageClient> from_env(std::size_t max_in_flight = 2);

  /// Raises ProviderUnavailable on transport errors and non-200 replies.
  std::vector<std::uint8_t> fetch_png(const std::string& prompt, std::size_t width,
                                      std::size_t height) const;

  const std::string& endpoint() const { return endpoint_; }
  std::size_t max_in_flight() const { return max_in_flight_; }

 private:
  std::string endpoint_;
  std::string token_;
  std::string host_;
  int port_ = 80;
  std::string path_;
  std::size_t max_in_flight_;
  double timeout_;
  std::unique_ptr<std::counting_semaphore<64>> slots_;
};

}  // namespace mlai
