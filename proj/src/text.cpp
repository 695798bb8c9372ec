#include "egvi/text.hpp"

#include <unicode/locid.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

namespace egvi::text {

std::string to_lower(std::string_view utf8) {
    icu::UnicodeString s = icu::UnicodeString::fromUTF8(
        icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
    s.toLower(icu::Locale::getRoot());
    std::string out;
    s.toUTF8String(out);
    return out;
}

bool is_whitespace(char32_t cp) { return u_isUWhiteSpace(static_cast<UChar32>(cp)); }

bool is_punctuation(char32_t cp) { return u_ispunct(static_cast<UChar32>(cp)); }

char32_t next_code_point(std::string_view utf8, std::size_t& pos) {
    const auto* s = reinterpret_cast<const uint8_t*>(utf8.data());
    auto i = static_cast<int32_t>(pos);
    const auto length = static_cast<int32_t>(utf8.size());
    UChar32 c;
    U8_NEXT(s, i, length, c);
    pos = static_cast<std::size_t>(i);
    return c < 0 ? char32_t{0xFFFD} : static_cast<char32_t>(c);
}

}  // namespace egvi::text
