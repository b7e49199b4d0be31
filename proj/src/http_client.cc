#include "causalmine/http_client.h"

#include <cstdio>

#include "causalmine/error.h"
#include "httplib.h"

namespace causalmine {

namespace {

template <typename Fn>
nlohmann::json with_retries(const HttpClientOptions& opts, const std::string& what,
                            Fn&& fn) {
  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= opts.retries; ++attempt) {
    httplib::Client client(opts.base_url);
    auto secs = static_cast<time_t>(opts.timeout_seconds);
    auto usecs = static_cast<time_t>((opts.timeout_seconds - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Result res = fn(client);
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kProviderUnavailable,
                  what + ": invalid JSON from " + opts.base_url + ": " + e.what());
    }
  }
  throw Error(ErrorCode::kProviderUnavailable,
              what + ": " + opts.base_url + " unreachable (" + last_error + ")");
}

}  // namespace

HttpJsonClient::HttpJsonClient(HttpClientOptions options) : options_(std::move(options)) {
  if (options_.base_url.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "HTTP provider requires a base URL");
  }
}

nlohmann::json HttpJsonClient::get(const std::string& path) const {
  return with_retries(options_, "GET " + path,
                      [&](httplib::Client& c) { return c.Get(path); });
}

nlohmann::json HttpJsonClient::post(const std::string& path,
                                    const nlohmann::json& body) const {
  std::string payload = body.dump();
  return with_retries(options_, "POST " + path, [&](httplib::Client& c) {
    return c.Post(path, payload, "application/json");
  });
}

std::string url_encode(const std::string& s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      char buf[4];
      std::snprintf(buf, sizeof(buf), "%%%02X", c);
      out += buf;
    }
  }
  return out;
}

}  // namespace causalmine
