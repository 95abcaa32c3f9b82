#pragma once

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "corpusforge/error.hpp"
#include "corpusforge/io.hpp"

namespace corpusforge::jsonl {

// ordered_json keeps insertion order, so record files have a stable field order.
using Json = nlohmann::ordered_json;

inline std::vector<Json> parse_lines(const std::string& text, const std::string& origin) {
  std::vector<Json> out;
  std::size_t lineno = 0;
  for (const auto& line : split_lines(text)) {
    ++lineno;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      raise(ErrorCode::Io, origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<Json> read(const std::filesystem::path& path) { return parse_lines(read_file(path), path.string()); }

inline std::string dump(const std::vector<Json>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

inline void write(const std::filesystem::path& path, const std::vector<Json>& records) {
  write_file_atomic(path, dump(records));
}

template <typename T>
T get(const Json& j, const char* key, const std::string& context) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::Io, context + ": field '" + key + "': " + e.what());
  }
}

template <typename T>
std::optional<T> get_opt(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->template get<T>();
}

template <typename T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace corpusforge::jsonl
