#pragma once

#include <string>
#include <string_view>
#include <vector>

// Unicode helpers and the deterministic comment-cleaning rules.
//
// Character classes are fixed tables rather than locale lookups so that the
// output never depends on the host environment:
//   emoji/symbols  U+00A9 U+00AE U+203C U+2049 U+2122 U+2139, U+2190-21FF,
//                  U+2300-23FF, U+2460-24FF, U+25A0-25FF, U+2600-27BF,
//                  U+2900-297F, U+2B00-2BFF, U+3030 U+303D U+3297 U+3299,
//                  U+1F000-1FBFF
//   invisible      C0/C1 controls other than whitespace, U+200B-200F,
//                  U+2060-2064, U+20E3, U+FE00-FE0F, U+FEFF, U+E0000-E007F
//   whitespace     U+0009-000D U+0020 U+0085 U+00A0 U+1680 U+2000-200A
//                  U+2028 U+2029 U+202F U+205F U+3000
//   case mapping   ASCII, Latin-1, Latin Extended-A, Latin Extended
//                  Additional, Greek, Cyrillic, Armenian, fullwidth Latin
namespace alrn::text {

std::u32string decode_utf8(std::string_view bytes);  // invalid bytes are dropped
std::string encode_utf8(std::u32string_view codepoints);

bool is_space(char32_t c) noexcept;
bool is_emoji_or_symbol(char32_t c) noexcept;
bool is_invisible(char32_t c) noexcept;
char32_t to_lower(char32_t c) noexcept;
bool is_upper(char32_t c) noexcept;
// Letters and digits; separators are ASCII non-alphanumerics plus the
// punctuation, currency and symbol blocks.
bool is_word_char(char32_t c) noexcept;

bool has_upper(std::string_view utf8);

/// Splits on runs of non-word characters; no empty pieces.
std::vector<std::string> split_words(std::string_view utf8);

struct CleanOptions {
  /// Replace each pictograph with an ASCII token "emoji<hex>" instead of
  /// deleting it.
  bool keep_emoji = false;
};

/// Removes URLs (scheme://... and www.... up to whitespace, case-insensitive),
/// HTML tags, emoji/symbol and invisible codepoints; maps newlines and other
/// whitespace to spaces; lowercases; collapses and trims spaces. The rule
/// sequence is repeated until the text stops changing, so a removal that
/// exposes a new URL or tag is handled and the function is idempotent.
std::string clean_text(std::string_view text, const CleanOptions& options = {});

}  // namespace alrn::text
