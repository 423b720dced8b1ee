#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "alrn/corpus.hpp"
#include "alrn/sentiment.hpp"
#include "alrn/tokenizer.hpp"

namespace alrn {

enum class Split { train, test };

std::string_view split_key(Split s) noexcept;
std::optional<Split> parse_split(std::string_view s) noexcept;

struct LabeledExample {
  CleanComment comment;
  SentimentLabel label = SentimentLabel::neutral;
  LabelSource source = LabelSource::mock_lexicon;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

struct LabeledDataset {
  std::vector<LabeledExample> examples;
  Split split = Split::train;

  /// SHA-256 over (id, text, label, source) of every example in order. The
  /// split is not part of it, so the same content used for training and for
  /// testing is recognised.
  std::string fingerprint() const;
  std::size_t size() const noexcept { return examples.size(); }
  bool empty() const noexcept { return examples.empty(); }
  std::array<std::size_t, kNumLabels> class_counts() const noexcept;
  std::vector<std::string> texts() const;

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

/// Writes the JSONL corpus format with label and label_source filled in.
void write_labeled_jsonl(const std::filesystem::path& path, const LabeledDataset& dataset);

/// Reads a labeled JSONL file. Every record needs label and label_source
/// (ValidationError otherwise). Texts are passed through the pipeline again; since
/// cleaning is idempotent, written datasets read back unchanged. Records that
/// clean to nothing count as incomplete and are skipped.
LabeledDataset read_labeled_jsonl(const std::filesystem::path& path, Split split,
                                  const TextPipeline& pipeline = TextPipeline::builtin());

/// Token-encoded form used for training and evaluation. vocab_digest is the
/// SHA-256 of the vocabulary text it was encoded with.
struct EncodedDataset {
  std::vector<TokenSequence> inputs;
  std::vector<int> labels;
  std::string vocab_digest;
  std::string fingerprint;  // of the source LabeledDataset
};

std::string vocab_digest(const Vocabulary& vocab);
EncodedDataset encode_dataset(const LabeledDataset& dataset, const Vocabulary& vocab, std::size_t max_len);

}  // namespace alrn
