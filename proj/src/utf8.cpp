#include "strkern/utf8.hpp"

#include <cstdint>

namespace strkern::utf8 {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

}  // namespace

std::u32string decode(std::string_view bytes) {
  std::u32string out;
  out.reserve(bytes.size());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t size = bytes.size();
  std::size_t i = 0;
  while (i < size) {
    const unsigned char lead = p[i];
    if (lead < 0x80) {
      out.push_back(lead);
      ++i;
      continue;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if ((lead & 0xE0) == 0xC0) {
      len = 2; cp = lead & 0x1F; min = 0x80;
    } else if ((lead & 0xF0) == 0xE0) {
      len = 3; cp = lead & 0x0F; min = 0x800;
    } else if ((lead & 0xF8) == 0xF0) {
      len = 4; cp = lead & 0x07; min = 0x10000;
    } else {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    bool ok = i + len <= size;
    for (std::size_t k = 1; ok && k < len; ++k) {
      const unsigned char c = p[i + k];
      if ((c & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (c & 0x3F);
      }
    }
    // overlong forms, surrogates and out-of-range values are rejected
    if (!ok || cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) append(out, cp);
  return out;
}

bool is_space(char32_t cp) noexcept {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

char32_t to_lower(char32_t cp) noexcept {
  if (cp >= U'A' && cp <= U'Z') return cp + 32;
  if (cp < 0xC0) return cp;
  if (cp <= 0xDE) return cp == 0xD7 ? cp : cp + 32;
  if (cp >= 0x100 && cp <= 0x17F) {
    if (cp == 0x130) return U'i';
    if (cp == 0x178) return 0xFF;
    const bool odd_upper = (cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E);
    if (odd_upper) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp == 0x138 || cp == 0x149 || cp == 0x17F) return cp;
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 32;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  return cp;
}

char32_t strip_accent(char32_t cp) noexcept {
  if (cp < 0xC0 || cp > 0x17F) return cp;
  // Latin-1 supplement, 0xC0..0xFF; 0 marks "no base letter"
  static constexpr char kLatin1[] =
      "AAAAAAACEEEEIIII"   // C0..CF (C6 is AE, mapped to A)
      "DNOOOOO\0OUUUUY\0\0"  // D0..DF
      "aaaaaaaceeeeiiii"   // E0..EF
      "dnooooo\0ouuuuy\0y";  // F0..FF
  static_assert(sizeof(kLatin1) == 0x40 + 1);
  if (cp <= 0xFF) {
    if (cp == 0xC6 || cp == 0xE6) return cp;
    const char base = kLatin1[cp - 0xC0];
    return base ? static_cast<char32_t>(base) : cp;
  }
  // Latin Extended-A, 0x100..0x17F, upper/lower pairs
  static constexpr char kExtA[] =
      "AaAaAaCcCcCcCcDd"  // 100..10F
      "DdEeEeEeEeEeGgGg"  // 110..11F
      "GgGgHhHhIiIiIiIi"  // 120..12F
      "I\0\0\0JjKk\0LlLlLlL"  // 130..13F
      "lLlNnNnNn\0\0\0OoOo"  // 140..14F
      "Oo\0\0RrRrRrSsSsSs"  // 150..15F
      "SsTtTtTtUuUuUuUu"  // 160..16F
      "UuUuWwYyYZzZzZz\0";  // 170..17F
  static_assert(sizeof(kExtA) == 0x80 + 1);
  const char base = kExtA[cp - 0x100];
  return base ? static_cast<char32_t>(base) : cp;
}

std::vector<std::u32string_view> split_whitespace(std::u32string_view text) {
  std::vector<std::u32string_view> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) tokens.push_back(text.substr(start, i - start));
  }
  return tokens;
}

}  // namespace strkern::utf8
