#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "alrn/sentiment.hpp"
#include "alrn/stemmer.hpp"
#include "alrn/text.hpp"

namespace alrn {

enum class Platform { reddit, twitter, tumblr, synthetic };

std::string_view platform_key(Platform p) noexcept;
std::optional<Platform> parse_platform(std::string_view s) noexcept;

/// One record of the JSONL corpus format. label/label_source are the
/// optional keys used by labeled datasets.
struct RawComment {
  std::string id;
  Platform platform = Platform::synthetic;
  std::string created_at;  // ISO-8601, e.g. 2023-01-01T00:00:00Z
  std::string text;
  std::optional<SentimentLabel> label;
  std::optional<LabelSource> label_source;
};

struct CleanComment {
  std::string id;
  Platform platform = Platform::synthetic;
  std::string created_at;
  std::string text;                      // model input
  std::vector<std::string> word_tokens;  // stemmed, stopword-free; for insights

  friend bool operator==(const CleanComment&, const CleanComment&) = default;
};

struct Provenance {
  std::vector<std::string> sources;
  std::string ingested_at;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Corpus {
  std::vector<CleanComment> comments;
  Provenance provenance;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

struct IngestResult {
  std::vector<RawComment> records;
  std::size_t skipped_incomplete = 0;  // records with missing or empty text
};

/// Reads the JSONL corpus format. Blank lines are ignored. Throws IoError if
/// the file cannot be opened and ParseError (with the 1-based line number)
/// for malformed lines, unknown platforms, bad timestamps or duplicate ids.
IngestResult ingest_jsonl(const std::filesystem::path& path);
IngestResult ingest_jsonl(std::istream& in);

/// Accepts YYYY-MM-DDTHH:MM:SS with optional fractional seconds and a Z or
/// +HH:MM / -HH:MM suffix.
bool is_iso8601_utc(std::string_view s) noexcept;

class StopwordSet {
 public:
  StopwordSet() = default;
  /// One lowercase word per line; '#' starts a comment.
  static StopwordSet parse(std::string_view text);
  static StopwordSet from_file(const std::filesystem::path& path);
  static const StopwordSet& builtin();  // stopwords_en_v1.txt

  bool contains(std::string_view word) const { return words_.contains(std::string(word)); }
  std::size_t size() const noexcept { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

/// Cleaning rules plus the word-token reduction used for insights.
class TextPipeline {
 public:
  TextPipeline(StopwordSet stopwords, Stemmer stemmer, text::CleanOptions options = {});
  static const TextPipeline& builtin();

  std::string clean(std::string_view text) const { return text::clean_text(text, options_); }

  /// Split on non-alphanumeric runs, stem, and drop a token when either its
  /// surface form or its stem is a stopword, or the stem is shorter than two
  /// characters.
  std::vector<std::string> word_tokens(std::string_view cleaned) const;

  /// nullopt when the cleaned text is empty.
  std::optional<CleanComment> to_clean(const RawComment& raw) const;

  const StopwordSet& stopwords() const noexcept { return stopwords_; }
  const text::CleanOptions& options() const noexcept { return options_; }

 private:
  StopwordSet stopwords_;
  Stemmer stemmer_;
  text::CleanOptions options_;
};

/// Cleans, drops empty results, keeps the first of each cleaned-text
/// duplicate, and fills word_tokens. Input order is preserved.
Corpus preprocess(std::span<const RawComment> raw, const TextPipeline& pipeline,
                  Provenance provenance = {});
Corpus preprocess(std::span<const RawComment> raw, const StopwordSet& stopwords);

/// JSONL writers. Clean comments are written with their cleaned text.
void write_raw_jsonl(const std::filesystem::path& path, std::span<const RawComment> records);
void write_corpus_jsonl(const std::filesystem::path& path, std::span<const CleanComment> comments);

}  // namespace alrn
