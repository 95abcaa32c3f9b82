#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace corpusforge {

struct Url {
  std::string scheme;  // lowercase, "http" or "https"
  std::string host;
  int port = 0;
  std::string target;  // path + query, always starts with '/'

  std::string origin() const;  // scheme://host:port
};

/// Parses an absolute HTTP(S) URL; nullopt for anything else.
std::optional<Url> parse_http_url(std::string_view text);

inline bool is_absolute_http_url(std::string_view text) { return parse_http_url(text).has_value(); }

}  // namespace corpusforge
