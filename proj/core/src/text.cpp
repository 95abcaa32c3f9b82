#include "corpusforge/text.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/uscript.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "corpusforge/error.hpp"

namespace corpusforge::text {
namespace {

icu::UnicodeString from_utf8(std::string_view s) {
  return icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
}

std::string utf8_of(const icu::UnicodeString& u) {
  std::string out;
  u.toUTF8String(out);
  return out;
}

const icu::Normalizer2& normalizer(bool compose) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n =
      compose ? icu::Normalizer2::getNFCInstance(status) : icu::Normalizer2::getNFDInstance(status);
  if (U_FAILURE(status) || n == nullptr) raise(ErrorCode::Io, "ICU normalizer unavailable");
  return *n;
}

icu::UnicodeString normalize(const icu::UnicodeString& u, bool compose) {
  UErrorCode status = U_ZERO_ERROR;
  auto out = normalizer(compose).normalize(u, status);
  if (U_FAILURE(status)) raise(ErrorCode::Io, "ICU normalization failed");
  return out;
}

}  // namespace

std::string nfc(std::string_view utf8) { return utf8_of(normalize(from_utf8(utf8), true)); }

std::string lower(std::string_view utf8) {
  auto u = from_utf8(utf8);
  u.toLower(icu::Locale::getRoot());
  return utf8_of(u);
}

std::string strip_combining_marks(std::string_view utf8) {
  const auto decomposed = normalize(from_utf8(utf8), false);
  icu::UnicodeString kept;
  for (int32_t i = 0; i < decomposed.length();) {
    const UChar32 cp = decomposed.char32At(i);
    if (u_charType(cp) != U_NON_SPACING_MARK) kept.append(cp);
    i += U16_LENGTH(cp);
  }
  return utf8_of(normalize(kept, true));
}

std::u32string to_utf32(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  const auto* s = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto len = static_cast<int32_t>(utf8.size());
  for (int32_t i = 0; i < len;) {
    UChar32 cp;
    U8_NEXT(s, i, len, cp);
    out.push_back(cp < 0 ? U'�' : static_cast<char32_t>(cp));
  }
  return out;
}

std::string to_utf8(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) {
    uint8_t buf[U8_MAX_LENGTH];
    int32_t n = 0;
    UBool err = false;
    U8_APPEND(buf, n, U8_MAX_LENGTH, static_cast<UChar32>(cp), err);
    if (err) continue;
    out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
  }
  return out;
}

bool is_letter(char32_t cp) { return u_isalpha(static_cast<UChar32>(cp)); }

bool is_digit(char32_t cp) { return u_isdigit(static_cast<UChar32>(cp)); }

bool is_whitespace(char32_t cp) { return u_isUWhiteSpace(static_cast<UChar32>(cp)); }

bool is_latin_letter(char32_t cp) {
  if (!is_letter(cp)) return false;
  UErrorCode status = U_ZERO_ERROR;
  const auto script = uscript_getScript(static_cast<UChar32>(cp), &status);
  return U_SUCCESS(status) && script == USCRIPT_LATIN;
}

std::vector<std::string> split_whitespace(std::string_view utf8) {
  std::vector<std::string> out;
  std::u32string current;
  for (char32_t cp : to_utf32(utf8)) {
    if (is_whitespace(cp)) {
      if (!current.empty()) out.push_back(to_utf8(current));
      current.clear();
    } else {
      current.push_back(cp);
    }
  }
  if (!current.empty()) out.push_back(to_utf8(current));
  return out;
}

bool is_valid_utf8(std::string_view bytes) {
  const auto* s = reinterpret_cast<const uint8_t*>(bytes.data());
  const auto len = static_cast<int32_t>(bytes.size());
  for (int32_t i = 0; i < len;) {
    UChar32 cp;
    U8_NEXT(s, i, len, cp);
    if (cp < 0) return false;
  }
  return true;
}

}  // namespace corpusforge::text
