#include "alrn/text.hpp"

#include <fmt/format.h>

namespace alrn::text {
namespace {

bool in(char32_t c, char32_t lo, char32_t hi) noexcept { return c >= lo && c <= hi; }

bool ascii_alpha(char32_t c) noexcept { return in(c, U'a', U'z') || in(c, U'A', U'Z'); }
bool ascii_alnum(char32_t c) noexcept { return ascii_alpha(c) || in(c, U'0', U'9'); }
char32_t ascii_lower(char32_t c) noexcept { return in(c, U'A', U'Z') ? c + 32 : c; }

// True if text[pos..] starts with the ASCII literal, ignoring case.
bool starts_with_ci(const std::u32string& text, std::size_t pos, std::string_view lit) noexcept {
  if (pos + lit.size() > text.size()) return false;
  for (std::size_t i = 0; i < lit.size(); ++i) {
    if (ascii_lower(text[pos + i]) != static_cast<char32_t>(lit[i])) return false;
  }
  return true;
}

bool url_scheme_char(char32_t c) noexcept {
  return ascii_alnum(c) || c == U'+' || c == U'.' || c == U'-';
}

std::u32string strip_urls(const std::u32string& in_text) {
  std::u32string out;
  out.reserve(in_text.size());
  std::size_t i = 0;
  while (i < in_text.size()) {
    std::size_t url_start = std::u32string::npos;
    if (in_text[i] == U':' && starts_with_ci(in_text, i, "://")) {
      // Walk back over the scheme characters already emitted.
      std::size_t j = out.size();
      while (j > 0 && url_scheme_char(out[j - 1])) --j;
      while (j < out.size() && !ascii_alpha(out[j])) ++j;
      if (j < out.size()) {
        out.resize(j);
        url_start = i;
      }
    } else if ((in_text[i] == U'w' || in_text[i] == U'W') && starts_with_ci(in_text, i, "www.") &&
               (out.empty() || !is_word_char(out.back()))) {
      url_start = i;
    }
    if (url_start == std::u32string::npos) {
      out.push_back(in_text[i++]);
      continue;
    }
    i = url_start;
    while (i < in_text.size() && !is_space(in_text[i])) ++i;
  }
  return out;
}

// Tags are "<" optional "/" or "!", a Latin letter, then anything but angle
// brackets up to ">".
std::u32string strip_tags(const std::u32string& in_text) {
  std::u32string out;
  out.reserve(in_text.size());
  std::size_t i = 0;
  while (i < in_text.size()) {
    if (in_text[i] == U'<') {
      std::size_t j = i + 1;
      if (j < in_text.size() && (in_text[j] == U'/' || in_text[j] == U'!')) ++j;
      if (j < in_text.size() && ascii_alpha(in_text[j])) {
        std::size_t k = j + 1;
        while (k < in_text.size() && in_text[k] != U'<' && in_text[k] != U'>') ++k;
        if (k < in_text.size() && in_text[k] == U'>') {
          i = k + 1;
          continue;
        }
      }
    }
    out.push_back(in_text[i++]);
  }
  return out;
}

std::u32string clean_once(const std::u32string& input, const CleanOptions& options) {
  std::u32string text = strip_tags(strip_urls(input));
  std::u32string out;
  out.reserve(text.size());
  bool pending_space = false;
  auto emit = [&](char32_t c) {
    if (pending_space && !out.empty()) out.push_back(U' ');
    pending_space = false;
    out.push_back(c);
  };
  for (char32_t c : text) {
    if (is_emoji_or_symbol(c)) {
      if (options.keep_emoji) {
        pending_space = true;
        for (char ch : fmt::format("emoji{:x}", static_cast<std::uint32_t>(c))) emit(static_cast<char32_t>(ch));
        pending_space = true;
      }
      continue;
    }
    if (is_invisible(c)) continue;
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    emit(to_lower(c));
  }
  return out;
}

}  // namespace

std::u32string decode_utf8(std::string_view bytes) {
  std::u32string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  const std::size_t n = bytes.size();
  while (i < n) {
    auto b0 = static_cast<unsigned char>(bytes[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2, cp = b0 & 0x1F, min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3, cp = b0 & 0x0F, min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4, cp = b0 & 0x07, min = 0x10000;
    } else {
      ++i;
      continue;
    }
    if (i + len > n) {
      ++i;
      continue;
    }
    bool ok = true;
    for (std::size_t k = 1; k < len; ++k) {
      auto b = static_cast<unsigned char>(bytes[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok || cp < min || cp > 0x10FFFF || in(cp, 0xD800, 0xDFFF)) {
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(std::u32string_view codepoints) {
  std::string out;
  out.reserve(codepoints.size());
  for (char32_t c : codepoints) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

bool is_space(char32_t c) noexcept {
  return in(c, 0x09, 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
         in(c, 0x2000, 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F ||
         c == 0x3000;
}

bool is_emoji_or_symbol(char32_t c) noexcept {
  return c == 0xA9 || c == 0xAE || c == 0x203C || c == 0x2049 || c == 0x2122 || c == 0x2139 ||
         in(c, 0x2190, 0x21FF) || in(c, 0x2300, 0x23FF) || in(c, 0x2460, 0x24FF) ||
         in(c, 0x25A0, 0x25FF) || in(c, 0x2600, 0x27BF) || in(c, 0x2900, 0x297F) ||
         in(c, 0x2B00, 0x2BFF) || c == 0x3030 || c == 0x303D || c == 0x3297 || c == 0x3299 ||
         in(c, 0x1F000, 0x1FBFF);
}

bool is_invisible(char32_t c) noexcept {
  if (is_space(c)) return false;
  return in(c, 0x00, 0x1F) || in(c, 0x7F, 0x9F) || in(c, 0x200B, 0x200F) ||
         in(c, 0x2060, 0x2064) || c == 0x20E3 || in(c, 0xFE00, 0xFE0F) || c == 0xFEFF ||
         in(c, 0xE0000, 0xE007F);
}

char32_t to_lower(char32_t c) noexcept {
  if (c < 0x80) return ascii_lower(c);
  if (in(c, 0xC0, 0xDE) && c != 0xD7) return c + 0x20;
  if (in(c, 0x100, 0x137) || in(c, 0x14A, 0x177)) return (c % 2 == 0) ? c + 1 : c;
  if (c == 0x130) return U'i';
  if (in(c, 0x139, 0x148) || in(c, 0x179, 0x17E)) return (c % 2 == 1) ? c + 1 : c;
  if (c == 0x178) return 0xFF;
  if (c == 0x386) return 0x3AC;
  if (in(c, 0x388, 0x38A)) return c + 37;
  if (c == 0x38C) return 0x3CC;
  if (in(c, 0x38E, 0x38F)) return c + 63;
  if (in(c, 0x391, 0x3AB) && c != 0x3A2) return c + 0x20;
  if (in(c, 0x400, 0x40F)) return c + 0x50;
  if (in(c, 0x410, 0x42F)) return c + 0x20;
  if (in(c, 0x460, 0x481) || in(c, 0x48A, 0x4BF) || in(c, 0x4D0, 0x52F)) return (c % 2 == 0) ? c + 1 : c;
  if (c == 0x4C0) return 0x4CF;
  if (in(c, 0x4C1, 0x4CE)) return (c % 2 == 1) ? c + 1 : c;
  if (in(c, 0x531, 0x556)) return c + 0x30;
  if (in(c, 0x1E00, 0x1E95) || in(c, 0x1EA0, 0x1EFF)) return (c % 2 == 0) ? c + 1 : c;
  if (in(c, 0xFF21, 0xFF3A)) return c + 0x20;
  return c;
}

bool is_upper(char32_t c) noexcept { return to_lower(c) != c; }

bool is_word_char(char32_t c) noexcept {
  if (c < 0x80) return ascii_alnum(c);
  if (is_space(c) || is_emoji_or_symbol(c) || is_invisible(c)) return false;
  return !(in(c, 0x80, 0xBF) || c == 0xD7 || c == 0xF7 || in(c, 0x2000, 0x206F) ||
           in(c, 0x20A0, 0x20CF) || in(c, 0x2100, 0x2BFF) || in(c, 0x3000, 0x303F) ||
           in(c, 0xFE10, 0xFE6F) || in(c, 0xFF00, 0xFF0F) || in(c, 0xFF1A, 0xFF20) ||
           in(c, 0xFF3B, 0xFF40) || in(c, 0xFF5B, 0xFF65));
}

bool has_upper(std::string_view utf8) {
  for (char32_t c : decode_utf8(utf8)) {
    if (is_upper(c)) return true;
  }
  return false;
}

std::vector<std::string> split_words(std::string_view utf8) {
  std::vector<std::string> words;
  std::u32string current;
  for (char32_t c : decode_utf8(utf8)) {
    if (is_word_char(c)) {
      current.push_back(c);
    } else if (!current.empty()) {
      words.push_back(encode_utf8(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(encode_utf8(current));
  return words;
}

std::string clean_text(std::string_view text, const CleanOptions& options) {
  std::u32string current = clean_once(decode_utf8(text), options);
  // Every pass that changes the text removes at least one codepoint, so this
  // terminates.
  for (;;) {
    std::u32string next = clean_once(current, options);
    if (next == current) break;
    current = std::move(next);
  }
  return encode_utf8(current);
}

}  // namespace alrn::text
