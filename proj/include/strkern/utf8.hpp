#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace strkern::utf8 {

/// Decodes UTF-8 into Unicode scalar values. Invalid sequences decode to
/// U+FFFD one byte at a time, so every input yields a sequence.
std::u32string decode(std::string_view bytes);

std::string encode(std::u32string_view text);
void append(std::string& out, char32_t cp);

bool is_space(char32_t cp) noexcept;

/// Simple (1:1) lower-casing for Latin, Greek and Cyrillic blocks.
char32_t to_lower(char32_t cp) noexcept;

/// Maps precomposed Latin letters with diacritics to their base letter.
char32_t strip_accent(char32_t cp) noexcept;

/// Maximal runs of non-whitespace scalar values.
std::vector<std::u32string_view> split_whitespace(std::u32string_view text);

}  // namespace strkern::utf8
