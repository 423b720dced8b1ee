#include "alrn/sentiment.hpp"

#include <fmt/format.h>

#include "alrn/error.hpp"

namespace alrn {
namespace {

bool iequals(std::string_view a, std::string_view b) noexcept {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    char x = a[i] >= 'A' && a[i] <= 'Z' ? static_cast<char>(a[i] + 32) : a[i];
    if (x != b[i]) return false;
  }
  return true;
}

}  // namespace

std::string_view label_name(SentimentLabel l) noexcept {
  switch (l) {
    case SentimentLabel::positive: return "Positive";
    case SentimentLabel::negative: return "Negative";
    case SentimentLabel::neutral: return "Neutral";
  }
  return "?";
}

std::string_view label_key(SentimentLabel l) noexcept {
  switch (l) {
    case SentimentLabel::positive: return "positive";
    case SentimentLabel::negative: return "negative";
    case SentimentLabel::neutral: return "neutral";
  }
  return "?";
}

SentimentLabel label_from_code(int c) {
  if (c < 0 || c >= static_cast<int>(kNumLabels)) {
    throw ValidationError(fmt::format("sentiment code {} out of range", c));
  }
  return static_cast<SentimentLabel>(c);
}

std::optional<SentimentLabel> parse_label(std::string_view s) noexcept {
  for (SentimentLabel l : kAllLabels) {
    if (iequals(s, label_key(l))) return l;
  }
  return std::nullopt;
}

std::string_view source_key(LabelSource s) noexcept {
  switch (s) {
    case LabelSource::llm: return "llm";
    case LabelSource::expert_consensus: return "expert_consensus";
    case LabelSource::synthetic_generator: return "synthetic_generator";
    case LabelSource::mock_lexicon: return "mock_lexicon";
  }
  return "?";
}

std::optional<LabelSource> parse_source(std::string_view s) noexcept {
  for (LabelSource src : {LabelSource::llm, LabelSource::expert_consensus,
                          LabelSource::synthetic_generator, LabelSource::mock_lexicon}) {
    if (s == source_key(src)) return src;
  }
  return std::nullopt;
}

}  // namespace alrn
