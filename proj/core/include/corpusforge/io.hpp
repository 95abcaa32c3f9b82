#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace corpusforge {

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file, then renames over `path`, so readers
/// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Splits on '\n', dropping a trailing '\r' from each line and the empty
/// remainder after a final newline.
std::vector<std::string> split_lines(std::string_view text);

}  // namespace corpusforge
