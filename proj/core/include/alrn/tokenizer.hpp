#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "alrn/corpus.hpp"

namespace alrn {

inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kClsId = 2;
inline constexpr int kFirstWordId = 3;

/// Word-level vocabulary. Ids 0..2 are [PAD], [UNK], [CLS]; words follow in
/// rank order (frequency descending, then word ascending).
class Vocabulary {
 public:
  Vocabulary();  // specials only

  int id_of(std::string_view word) const;  // kUnkId when absent
  const std::string& word_of(int id) const;  // throws ValidationError when out of range
  bool contains(std::string_view word) const;
  std::size_t size() const noexcept { return words_.size(); }
  int min_freq() const noexcept { return min_freq_; }
  std::size_t max_size() const noexcept { return max_size_; }
  std::span<const std::string> words() const noexcept { return words_; }

  /// Text form: a header line "#alrn-vocab v1 min_freq=<n> max_size=<n>"
  /// followed by one "word<TAB>id" line per entry in id order.
  std::string to_text() const;
  static Vocabulary from_text(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.words_ == b.words_ && a.min_freq_ == b.min_freq_ && a.max_size_ == b.max_size_;
  }

 private:
  friend Vocabulary build_vocab(std::span<const std::string>, int, std::size_t);
  void add(std::string word);

  std::vector<std::string> words_;
  std::unordered_map<std::string, int> ids_;
  int min_freq_ = 1;
  std::size_t max_size_ = 0;
};

struct TokenSequence {
  std::vector<int> ids;
  std::vector<int> mask;  // 1 for real positions, including [CLS]

  std::size_t length() const noexcept;  // number of real positions
  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

/// Throws ValidationError for an empty corpus, min_freq < 1 or max_size < 4.
Vocabulary build_vocab(std::span<const std::string> cleaned_texts, int min_freq, std::size_t max_size);
Vocabulary build_vocab(const Corpus& corpus, int min_freq, std::size_t max_size);

inline constexpr std::size_t kDefaultMaxLen = 64;

/// [CLS] followed by word ids, truncated to max_len and padded with [PAD].
TokenSequence encode(std::string_view cleaned_text, const Vocabulary& vocab, std::size_t max_len);

/// [PAD] ids are dropped; throws ValidationError for ids outside the vocabulary.
std::vector<std::string> decode(std::span<const int> ids, const Vocabulary& vocab);

}  // namespace alrn
