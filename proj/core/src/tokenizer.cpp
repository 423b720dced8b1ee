#include "alrn/tokenizer.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "alrn/error.hpp"
#include "alrn/text.hpp"

namespace alrn {

Vocabulary::Vocabulary() {
  add("[PAD]");
  add("[UNK]");
  add("[CLS]");
}

void Vocabulary::add(std::string word) {
  ids_.emplace(word, static_cast<int>(words_.size()));
  words_.push_back(std::move(word));
}

int Vocabulary::id_of(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  return it == ids_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(std::string_view word) const { return ids_.contains(std::string(word)); }

const std::string& Vocabulary::word_of(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= words_.size()) {
    throw ValidationError(fmt::format("token id {} outside vocabulary of size {}", id, words_.size()));
  }
  return words_[static_cast<std::size_t>(id)];
}

std::string Vocabulary::to_text() const {
  std::string out = fmt::format("#alrn-vocab v1 min_freq={} max_size={}\n", min_freq_, max_size_);
  for (std::size_t i = 0; i < words_.size(); ++i) out += fmt::format("{}\t{}\n", words_[i], i);
  return out;
}

Vocabulary Vocabulary::from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line.rfind("#alrn-vocab v1 ", 0) != 0) {
    throw ParseError(1, "missing '#alrn-vocab v1' header");
  }
  Vocabulary v;
  v.words_.clear();
  v.ids_.clear();
  if (std::sscanf(line.c_str(), "#alrn-vocab v1 min_freq=%d max_size=%zu", &v.min_freq_, &v.max_size_) != 2) {
    throw ParseError(1, "malformed vocabulary header");
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw ParseError(lineno, "expected word<TAB>id");
    std::string word = line.substr(0, tab);
    int id = -1;
    try {
      id = std::stoi(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw ParseError(lineno, "bad id");
    }
    if (id != static_cast<int>(v.words_.size())) {
      throw ParseError(lineno, fmt::format("ids must be contiguous; expected {}", v.words_.size()));
    }
    if (v.ids_.contains(word)) throw ParseError(lineno, fmt::format("duplicate word '{}'", word));
    v.add(std::move(word));
  }
  if (v.words_.size() < 3 || v.words_[kPadId] != "[PAD]" || v.words_[kUnkId] != "[UNK]" ||
      v.words_[kClsId] != "[CLS]") {
    throw ParseError(lineno, "vocabulary must start with [PAD], [UNK], [CLS]");
  }
  return v;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write vocabulary '{}'", path.string()));
  out << to_text();
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read vocabulary '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

std::size_t TokenSequence::length() const noexcept {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
}

Vocabulary build_vocab(std::span<const std::string> cleaned_texts, int min_freq, std::size_t max_size) {
  if (min_freq < 1) throw ValidationError("build_vocab: min_freq must be >= 1");
  if (max_size < 4) throw ValidationError("build_vocab: max_size must be >= 4");
  if (cleaned_texts.empty()) throw ValidationError("build_vocab: corpus is empty");

  std::map<std::string, long> freq;
  for (const std::string& t : cleaned_texts) {
    for (std::string& w : text::split_words(t)) ++freq[std::move(w)];
  }
  std::vector<std::pair<std::string, long>> ranked;
  for (auto& [w, n] : freq) {
    if (n >= min_freq) ranked.emplace_back(w, n);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary v;
  v.min_freq_ = min_freq;
  v.max_size_ = max_size;
  for (std::size_t i = 0; i < ranked.size() && v.size() < max_size; ++i) v.add(ranked[i].first);
  return v;
}

Vocabulary build_vocab(const Corpus& corpus, int min_freq, std::size_t max_size) {
  std::vector<std::string> texts;
  texts.reserve(corpus.comments.size());
  for (const auto& c : corpus.comments) texts.push_back(c.text);
  return build_vocab(texts, min_freq, max_size);
}

TokenSequence encode(std::string_view cleaned_text, const Vocabulary& vocab, std::size_t max_len) {
  if (max_len < 2) throw ValidationError("encode: max_len must be >= 2");
  TokenSequence seq{std::vector<int>(max_len, kPadId), std::vector<int>(max_len, 0)};
  seq.ids[0] = kClsId;
  seq.mask[0] = 1;
  std::size_t pos = 1;
  for (const std::string& w : text::split_words(cleaned_text)) {
    if (pos >= max_len) break;
    seq.ids[pos] = vocab.id_of(w);
    seq.mask[pos] = 1;
    ++pos;
  }
  return seq;
}

std::vector<std::string> decode(std::span<const int> ids, const Vocabulary& vocab) {
  std::vector<std::string> words;
  for (int id : ids) {
    const std::string& w = vocab.word_of(id);
    if (id != kPadId) words.push_back(w);
  }
  return words;
}

}  // namespace alrn
