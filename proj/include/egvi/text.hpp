#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace egvi::text {

// Unicode full lowercase of a UTF-8 string (ICU root locale).
std::string to_lower(std::string_view utf8);

bool is_whitespace(char32_t cp);
bool is_punctuation(char32_t cp);

// Decodes one code point at `pos` and advances it. Ill-formed sequences yield
// U+FFFD and consume at least one byte.
char32_t next_code_point(std::string_view utf8, std::size_t& pos);

}  // namespace egvi::text
