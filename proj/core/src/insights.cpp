#include "alrn/insights.hpp"

#include <algorithm>

#include "alrn/error.hpp"

namespace alrn {

FrequencyTable count_ngrams(std::span<const CleanComment> comments, NgramOrders orders, SentimentLabel sentiment) {
  FrequencyTable t;
  t.sentiment = sentiment;
  t.total_comments = comments.size();
  for (const CleanComment& c : comments) {
    const auto& w = c.word_tokens;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (orders.unigrams) ++t.counts[w[i]];
      if (orders.bigrams && i + 1 < w.size()) ++t.counts[w[i] + " " + w[i + 1]];
    }
  }
  return t;
}

std::vector<FrequencyEntry> top_k(const FrequencyTable& table, std::size_t k) {
  if (k < 1) throw ValidationError("top_k: k must be at least 1");
  std::vector<FrequencyEntry> entries(table.counts.begin(), table.counts.end());
  auto before = [](const FrequencyEntry& a, const FrequencyEntry& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  };
  const std::size_t n = std::min(k, entries.size());
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(n), entries.end(), before);
  entries.resize(n);
  return entries;
}

}  // namespace alrn
