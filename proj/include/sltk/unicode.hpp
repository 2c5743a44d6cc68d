#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sltk::uni {

// Lossless for valid UTF-8; invalid byte sequences decode to U+FFFD one byte
// at a time, so decoding never fails.
std::u32string decode_utf8(std::string_view s);

void append_utf8(std::string& out, char32_t cp);
std::string encode_utf8(std::u32string_view s);

char32_t to_lower(char32_t cp);
bool is_space(char32_t cp);
bool is_punct(char32_t cp);

// Extended grapheme clusters: combining marks, ZWJ/ZWNJ, variation
// selectors, and Hangul jamo composition attach to the preceding base.
std::vector<std::string> graphemes(std::string_view s);

}  // namespace sltk::uni
