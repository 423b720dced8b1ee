#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace alrn {

// Stable integer codes; the classifier head's output index is the code.
enum class SentimentLabel : int { positive = 0, negative = 1, neutral = 2 };

inline constexpr std::size_t kNumLabels = 3;
inline constexpr std::array<SentimentLabel, kNumLabels> kAllLabels{
    SentimentLabel::positive, SentimentLabel::negative, SentimentLabel::neutral};

constexpr int code(SentimentLabel l) noexcept { return static_cast<int>(l); }

// "Positive" / "Negative" / "Neutral".
std::string_view label_name(SentimentLabel l) noexcept;
// Lowercase form used in file formats.
std::string_view label_key(SentimentLabel l) noexcept;
SentimentLabel label_from_code(int code);
// Accepts either spelling, case-insensitively.
std::optional<SentimentLabel> parse_label(std::string_view s) noexcept;

enum class LabelSource { llm, expert_consensus, synthetic_generator, mock_lexicon };

std::string_view source_key(LabelSource s) noexcept;
std::optional<LabelSource> parse_source(std::string_view s) noexcept;

}  // namespace alrn
