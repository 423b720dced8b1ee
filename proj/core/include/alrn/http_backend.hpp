#pragma once

#include <string>
#include <string_view>

#include "alrn/labeling.hpp"

namespace alrn {

struct HttpBackendConfig {
  /// Full endpoint, e.g. http://127.0.0.1:8080/v1/complete or https://...
  std::string endpoint;
  std::string model = "default";
  /// Name of the environment variable holding the bearer token. The token is
  /// never read from configuration files. An unset variable sends no
  /// Authorization header.
  std::string token_env = "ALRN_LABELER_TOKEN";
  double timeout_seconds = 30.0;
};

/// POSTs {"model": ..., "prompt": ...} as JSON and expects a JSON object with
/// a string field "text". 401/403 and malformed endpoints raise
/// BackendFatalError; transport errors, timeouts, other non-2xx statuses and
/// malformed bodies raise BackendError (retried by the labeling loop).
class HttpBackend final : public LabelerBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  std::string label(std::string_view text) override;
  std::string generate(SentimentLabel label, std::size_t count) override;
  std::string describe() const override;

  /// Sends one prompt and returns the "text" field of the reply.
  std::string complete(const std::string& prompt);

 private:
  HttpBackendConfig config_;
  std::string scheme_host_port_;
  std::string path_;
};

}  // namespace alrn
