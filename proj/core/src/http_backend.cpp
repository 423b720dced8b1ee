#include "alrn/http_backend.hpp"

#include <cmath>
#include <cstdlib>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "alrn/error.hpp"

namespace alrn {

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  const std::string& url = config_.endpoint;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw BackendFatalError(fmt::format("labeler endpoint '{}' has no scheme", url));
  }
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw BackendFatalError(fmt::format("labeler endpoint scheme '{}' is not http or https", scheme));
  }
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (scheme_host_port_.size() == scheme_end + 3) {
    throw BackendFatalError(fmt::format("labeler endpoint '{}' has no host", url));
  }
  if (!(config_.timeout_seconds > 0)) throw ConfigError("labeler timeout must be positive");
}

std::string HttpBackend::complete(const std::string& prompt) {
  httplib::Client client(scheme_host_port_);
  const auto whole = static_cast<time_t>(config_.timeout_seconds);
  const auto micros = static_cast<time_t>(std::llround((config_.timeout_seconds - static_cast<double>(whole)) * 1e6));
  client.set_connection_timeout(whole, micros);
  client.set_read_timeout(whole, micros);
  client.set_write_timeout(whole, micros);

  httplib::Headers headers;
  if (const char* token = std::getenv(config_.token_env.c_str()); token != nullptr && *token != '\0') {
    headers.emplace("Authorization", fmt::format("Bearer {}", token));
  }
  const std::string body = nlohmann::json{{"model", config_.model}, {"prompt", prompt}}.dump();
  auto res = client.Post(path_, headers, body, "application/json");
  if (!res) {
    throw BackendError(fmt::format("labeler request to {} failed: {}", config_.endpoint, httplib::to_string(res.error())));
  }
  if (res->status == 401 || res->status == 403) {
    throw BackendFatalError(fmt::format("labeler rejected credentials (HTTP {})", res->status));
  }
  if (res->status < 200 || res->status >= 300) {
    throw BackendError(fmt::format("labeler returned HTTP {}", res->status));
  }
  try {
    auto reply = nlohmann::json::parse(res->body);
    if (!reply.is_object() || !reply.contains("text") || !reply["text"].is_string()) {
      throw BackendError("labeler reply has no string field 'text'");
    }
    return reply["text"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(fmt::format("labeler reply is not JSON ({})", e.what()));
  }
}

std::string HttpBackend::label(std::string_view text) { return complete(label_prompt(text)); }

std::string HttpBackend::generate(SentimentLabel label, std::size_t count) {
  return complete(generate_prompt(label, count));
}

std::string HttpBackend::describe() const { return fmt::format("http({}, model={})", config_.endpoint, config_.model); }

}  // namespace alrn
