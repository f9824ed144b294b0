#pragma once

// Internal helper shared by the embeddings and chat clients; not installed.

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#include <httplib.h>

#include "ragxlate/errors.hpp"

namespace ragxlate::detail {

struct SplitUrl {
  std::string base;  // scheme://host[:port]
  std::string path;  // starts with '/', "/" when the URL has none
};

inline SplitUrl split_url(const std::string& endpoint) {
  const std::size_t scheme = endpoint.find("://");
  if (scheme == std::string::npos)
    throw ArgumentError("endpoint is not a URL: " + endpoint);
  const std::size_t slash = endpoint.find('/', scheme + 3);
  if (slash == std::string::npos) return {endpoint, "/"};
  return {endpoint.substr(0, slash), endpoint.substr(slash)};
}

// POST a JSON body, retrying transient failures (connect errors, timeouts,
// 408/429/5xx) with exponential backoff. Non-retryable HTTP statuses and an
// exhausted budget raise TransportError naming the retry count.
inline std::string post_json_with_retries(const std::string& endpoint,
                                          const std::string& body,
                                          const std::string& bearer_env,
                                          int timeout_ms, int max_retries,
                                          int backoff_ms) {
  const SplitUrl url = split_url(endpoint);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (url.base.rfind("https://", 0) == 0)
    throw TransportError("https endpoint requires a TLS-enabled build: " +
                         endpoint);
#endif

  httplib::Client client(url.base);
  client.set_connection_timeout(0, timeout_ms * 1000LL);
  client.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
  client.set_write_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);

  httplib::Headers headers;
  if (!bearer_env.empty()) {
    if (const char* key = std::getenv(bearer_env.c_str()); key && *key)
      headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  std::string last_failure = "no attempt made";
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    if (attempt > 0) {
      const auto delay = std::chrono::milliseconds(
          static_cast<long long>(backoff_ms) << (attempt - 1));
      std::this_thread::sleep_for(delay);
    }
    httplib::Result res = client.Post(url.path, headers, body, "application/json");
    if (!res) {
      last_failure = "transport: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) return res->body;
    last_failure = "HTTP " + std::to_string(res->status);
    const bool retryable =
        res->status >= 500 || res->status == 408 || res->status == 429;
    if (!retryable)
      throw TransportError("POST " + endpoint + " failed (" + last_failure +
                           ", not retryable, after " + std::to_string(attempt) +
                           " retries)");
  }
  throw TransportError("POST " + endpoint + " failed (" + last_failure +
                       ") after " + std::to_string(max_retries) + " retries");
}

}  // namespace ragxlate::detail
