#pragma once

#include <string>
#include <string_view>
#include <vector>

// Unicode helpers over UTF-8 strings, backed by ICU.
namespace corpusforge::text {

std::string nfc(std::string_view utf8);

/// Full Unicode lowercasing in the root locale (no locale tailoring).
std::string lower(std::string_view utf8);

/// Decomposes, drops nonspacing combining marks (Mn), recomposes.
std::string strip_combining_marks(std::string_view utf8);

std::u32string to_utf32(std::string_view utf8);
std::string to_utf8(std::u32string_view cps);

bool is_letter(char32_t cp);
bool is_digit(char32_t cp);
bool is_whitespace(char32_t cp);
bool is_latin_letter(char32_t cp);

/// Splits on Unicode whitespace, discarding empty pieces.
std::vector<std::string> split_whitespace(std::string_view utf8);

bool is_valid_utf8(std::string_view bytes);

}  // namespace corpusforge::text
