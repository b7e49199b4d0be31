#ifndef CAUSALMINE_HTTP_CLIENT_H_
#define CAUSALMINE_HTTP_CLIENT_H_

#include <memory>
#include <string>

#include "json.hpp"

namespace causalmine {

struct HttpClientOptions {
  std::string base_url;        // e.g. http://localhost:9000
  double timeout_seconds = 10.0;
  int retries = 2;             // additional attempts after the first
};

// Minimal JSON-over-HTTP client shared by the tagger, embedding, and concept
// providers. Transport failures and non-2xx responses raise
// ErrorCode::kProviderUnavailable once the retry budget is spent. Safe for
// concurrent use: every request opens its own connection.
class HttpJsonClient {
 public:
  explicit HttpJsonClient(HttpClientOptions options);

  nlohmann::json get(const std::string& path) const;
  nlohmann::json post(const std::string& path, const nlohmann::json& body) const;

  const HttpClientOptions& options() const { return options_; }

 private:
  HttpClientOptions options_;
};

std::string url_encode(const std::string& s);

}  // namespace causalmine

#endif  // CAUSALMINE_HTTP_CLIENT_H_
