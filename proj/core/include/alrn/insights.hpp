#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "alrn/corpus.hpp"
#include "alrn/sentiment.hpp"

namespace alrn {

struct FrequencyTable {
  SentimentLabel sentiment = SentimentLabel::neutral;
  std::map<std::string, std::size_t> counts;  // unigram or space-joined bigram -> count
  std::size_t total_comments = 0;

  friend bool operator==(const FrequencyTable&, const FrequencyTable&) = default;
};

struct NgramOrders {
  bool unigrams = true;
  bool bigrams = true;
};

/// Counts over each comment's word_tokens; bigrams pair adjacent surviving
/// tokens within one comment. The caller groups comments by sentiment.
FrequencyTable count_ngrams(std::span<const CleanComment> comments, NgramOrders orders = {},
                            SentimentLabel sentiment = SentimentLabel::neutral);

using FrequencyEntry = std::pair<std::string, std::size_t>;

/// The k most frequent entries by (count desc, n-gram asc). k must be >= 1.
std::vector<FrequencyEntry> top_k(const FrequencyTable& table, std::size_t k);

struct WordCloudOptions {
  double width = 800;
  double height = 500;
  double min_font = 12;
  double max_font = 64;
  double char_width = 0.6;   // glyph advance as a fraction of font size
  double line_height = 1.1;  // box height as a fraction of font size
  double padding = 2;
  double spiral_step = 0.5;  // radians per probe
  std::string font_family = "Helvetica, Arial, sans-serif";
};

struct WordPlacement {
  std::string ngram;
  std::size_t count = 0;
  double font_size = 0;
  double x = 0;  // box centre
  double y = 0;
  double box_width = 0;
  double box_height = 0;
};

struct WordCloud {
  std::vector<WordPlacement> words;
  std::string svg;
  std::string sidecar_json;
};

/// font = max_font * sqrt(count / top count), clamped below at min_font, so
/// the size is proportional to sqrt(count). Words go largest first along an
/// Archimedean spiral from the canvas centre whose start angle is drawn from
/// the seed; a position is taken only if the word's box overlaps no earlier
/// box. Every one of the top k words is placed; the SVG viewBox grows if the
/// spiral leaves the nominal canvas.
WordCloud render_wordcloud(const FrequencyTable& table, std::size_t k, std::uint64_t seed,
                           const WordCloudOptions& options = {});

}  // namespace alrn
