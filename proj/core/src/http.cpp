#include "http.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>

#include "corpusforge/url.hpp"

namespace corpusforge::http {
namespace {

std::string lowercase(std::string s) {
  std::ranges::transform(s, s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

void copy_headers(const httplib::Response& from, Response& to) {
  to.status = from.status;
  for (const auto& [k, v] : from.headers) to.headers[lowercase(k)] = v;
}

httplib::Client make_client(const Url& url, const Timeouts& timeouts) {
  httplib::Client cli(url.origin());
  cli.set_follow_location(true);
  cli.set_connection_timeout(timeouts.connect);
  cli.set_read_timeout(timeouts.read);
  cli.set_keep_alive(false);
  return cli;
}

httplib::Headers to_httplib(const Headers& headers) {
  httplib::Headers out;
  for (const auto& [k, v] : headers) out.emplace(k, v);
  out.emplace("User-Agent", "corpusforge/0.1");
  return out;
}

}  // namespace

Response get(std::string_view url_text, const Timeouts& timeouts, const Headers& headers) {
  Response out;
  const auto url = parse_http_url(url_text);
  if (!url) {
    out.error = "not an absolute http(s) url";
    return out;
  }
  auto cli = make_client(*url, timeouts);
  auto res = cli.Get(url->target, to_httplib(headers));
  if (!res) {
    out.error = httplib::to_string(res.error());
    return out;
  }
  out.transport_ok = true;
  copy_headers(*res, out);
  out.body = std::move(res->body);
  return out;
}

Response get_stream(std::string_view url_text, const Timeouts& timeouts, const Headers& headers,
                    const std::function<bool(const Response&)>& on_headers,
                    const std::function<bool(const char*, std::size_t)>& on_data) {
  Response out;
  const auto url = parse_http_url(url_text);
  if (!url) {
    out.error = "not an absolute http(s) url";
    return out;
  }
  auto cli = make_client(*url, timeouts);
  bool body_wanted = true;
  auto res = cli.Get(
      url->target, to_httplib(headers),
      [&](const httplib::Response& r) {
        copy_headers(r, out);
        body_wanted = on_headers(out);
        return body_wanted;
      },
      [&](const char* data, std::size_t len) { return on_data(data, len); });
  if (!res) {
    // A handler-requested cancel after headers is not a transport failure.
    if (!body_wanted && res.error() == httplib::Error::Canceled) {
      out.transport_ok = true;
      return out;
    }
    out.error = httplib::to_string(res.error());
    return out;
  }
  out.transport_ok = true;
  copy_headers(*res, out);
  return out;
}

}  // namespace corpusforge::http
