#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace corpusforge::http {

struct Timeouts {
  std::chrono::milliseconds connect{5000};
  std::chrono::milliseconds read{30000};
};

struct Response {
  bool transport_ok = false;  // false: connection error or aborted body
  int status = 0;
  std::string error;
  std::map<std::string, std::string> headers;  // lowercase names
  std::string body;                            // empty when streamed

  bool ok() const { return transport_ok && status >= 200 && status < 300; }
  std::string header(const std::string& lower_name) const {
    auto it = headers.find(lower_name);
    return it == headers.end() ? std::string{} : it->second;
  }
};

using Headers = std::vector<std::pair<std::string, std::string>>;

Response get(std::string_view url, const Timeouts& timeouts, const Headers& headers = {});

/// Streams the body into `on_data`. `on_headers` sees the status line and
/// headers before any data and may return false to skip the body.
Response get_stream(std::string_view url, const Timeouts& timeouts, const Headers& headers,
                    const std::function<bool(const Response&)>& on_headers,
                    const std::function<bool(const char*, std::size_t)>& on_data);

}  // namespace corpusforge::http
