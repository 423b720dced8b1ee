#include "alrn/corpus.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

#include "alrn/embedded_data.hpp"
#include "alrn/error.hpp"

namespace alrn {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view platform_key(Platform p) noexcept {
  switch (p) {
    case Platform::reddit: return "reddit";
    case Platform::twitter: return "twitter";
    case Platform::tumblr: return "tumblr";
    case Platform::synthetic: return "synthetic";
  }
  return "?";
}

std::optional<Platform> parse_platform(std::string_view s) noexcept {
  for (Platform p : {Platform::reddit, Platform::twitter, Platform::tumblr, Platform::synthetic}) {
    if (s == platform_key(p)) return p;
  }
  return std::nullopt;
}

bool is_iso8601_utc(std::string_view s) noexcept {
  auto digits = [&](std::size_t pos, std::size_t n) {
    if (pos + n > s.size()) return false;
    for (std::size_t i = pos; i < pos + n; ++i) {
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    return true;
  };
  auto at = [&](std::size_t pos, char c) { return pos < s.size() && s[pos] == c; };
  if (!(digits(0, 4) && at(4, '-') && digits(5, 2) && at(7, '-') && digits(8, 2) && at(10, 'T') &&
        digits(11, 2) && at(13, ':') && digits(14, 2) && at(16, ':') && digits(17, 2))) {
    return false;
  }
  int month = (s[5] - '0') * 10 + (s[6] - '0');
  int day = (s[8] - '0') * 10 + (s[9] - '0');
  int hour = (s[11] - '0') * 10 + (s[12] - '0');
  int minute = (s[14] - '0') * 10 + (s[15] - '0');
  int second = (s[17] - '0') * 10 + (s[18] - '0');
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60) {
    return false;
  }
  std::size_t pos = 19;
  if (at(pos, '.')) {
    ++pos;
    std::size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == start) return false;
  }
  if (at(pos, 'Z')) return pos + 1 == s.size();
  if (at(pos, '+') || at(pos, '-')) {
    return digits(pos + 1, 2) && at(pos + 3, ':') && digits(pos + 4, 2) && pos + 6 == s.size();
  }
  return false;
}

IngestResult ingest_jsonl(std::istream& in) {
  IngestResult result;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(lineno, fmt::format("not a JSON record ({})", e.what()));
    }
    if (!rec.is_object()) throw ParseError(lineno, "record is not a JSON object");

    auto required_string = [&](const char* key) -> std::string {
      auto it = rec.find(key);
      if (it == rec.end() || !it->is_string()) {
        throw ParseError(lineno, fmt::format("missing or non-string field '{}'", key));
      }
      return it->get<std::string>();
    };

    RawComment c;
    c.id = required_string("id");
    if (c.id.empty()) throw ParseError(lineno, "empty id");
    std::string platform = required_string("platform");
    auto p = parse_platform(platform);
    if (!p) throw ParseError(lineno, fmt::format("unknown platform '{}'", platform));
    c.platform = *p;
    c.created_at = required_string("created_at");
    if (!is_iso8601_utc(c.created_at)) {
      throw ParseError(lineno, fmt::format("created_at '{}' is not ISO-8601", c.created_at));
    }
    if (auto it = rec.find("label"); it != rec.end() && !it->is_null()) {
      auto l = it->is_string() ? parse_label(it->get<std::string>()) : std::nullopt;
      if (!l) throw ParseError(lineno, "label must be one of positive/negative/neutral");
      c.label = *l;
    }
    if (auto it = rec.find("label_source"); it != rec.end() && !it->is_null()) {
      auto s = it->is_string() ? parse_source(it->get<std::string>()) : std::nullopt;
      if (!s) throw ParseError(lineno, "unknown label_source");
      c.label_source = *s;
    }

    auto text_it = rec.find("text");
    if (text_it != rec.end() && !text_it->is_null() && !text_it->is_string()) {
      throw ParseError(lineno, "field 'text' is not a string");
    }
    if (text_it == rec.end() || text_it->is_null() || text_it->get_ref<const std::string&>().empty()) {
      ++result.skipped_incomplete;
      continue;
    }
    c.text = text_it->get<std::string>();
    if (!ids.insert(c.id).second) throw ParseError(lineno, fmt::format("duplicate id '{}'", c.id));
    result.records.push_back(std::move(c));
  }
  return result;
}

IngestResult ingest_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read corpus '{}'", path.string()));
  try {
    return ingest_jsonl(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), fmt::format("{}: {}", path.string(), e.what()));
  }
}

StopwordSet StopwordSet::parse(std::string_view text) {
  StopwordSet set;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string word;
    if (fields >> word) set.words_.insert(word);
  }
  return set;
}

StopwordSet StopwordSet::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read stopwords '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const StopwordSet& StopwordSet::builtin() {
  static const StopwordSet instance = parse(embedded::stopwords_en_v1());
  return instance;
}

TextPipeline::TextPipeline(StopwordSet stopwords, Stemmer stemmer, text::CleanOptions options)
    : stopwords_(std::move(stopwords)), stemmer_(std::move(stemmer)), options_(options) {}

const TextPipeline& TextPipeline::builtin() {
  static const TextPipeline instance(StopwordSet::builtin(), Stemmer::builtin());
  return instance;
}

std::vector<std::string> TextPipeline::word_tokens(std::string_view cleaned) const {
  std::vector<std::string> out;
  for (std::string& w : text::split_words(cleaned)) {
    if (stopwords_.contains(w)) continue;
    std::string s = stemmer_.stem(w);
    if (s.size() < 2 || stopwords_.contains(s)) continue;
    out.push_back(std::move(s));
  }
  return out;
}

std::optional<CleanComment> TextPipeline::to_clean(const RawComment& raw) const {
  std::string cleaned = clean(raw.text);
  if (cleaned.empty()) return std::nullopt;
  CleanComment c{raw.id, raw.platform, raw.created_at, std::move(cleaned), {}};
  c.word_tokens = word_tokens(c.text);
  return c;
}

Corpus preprocess(std::span<const RawComment> raw, const TextPipeline& pipeline, Provenance provenance) {
  Corpus corpus;
  corpus.provenance = std::move(provenance);
  std::unordered_set<std::string> seen;
  for (const RawComment& r : raw) {
    auto c = pipeline.to_clean(r);
    if (!c || !seen.insert(c->text).second) continue;
    corpus.comments.push_back(std::move(*c));
  }
  return corpus;
}

Corpus preprocess(std::span<const RawComment> raw, const StopwordSet& stopwords) {
  return preprocess(raw, TextPipeline(stopwords, Stemmer::builtin()));
}

namespace {

template <typename Range, typename ToJson>
void write_lines(const std::filesystem::path& path, const Range& items, ToJson&& to_json) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  for (const auto& item : items) out << to_json(item).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  if (!out) throw IoError(fmt::format("write failed for '{}'", path.string()));
}

}  // namespace

void write_raw_jsonl(const std::filesystem::path& path, std::span<const RawComment> records) {
  write_lines(path, records, [](const RawComment& r) {
    ordered_json j;
    j["id"] = r.id;
    j["platform"] = platform_key(r.platform);
    j["created_at"] = r.created_at;
    j["text"] = r.text;
    if (r.label) j["label"] = label_key(*r.label);
    if (r.label_source) j["label_source"] = source_key(*r.label_source);
    return j;
  });
}

void write_corpus_jsonl(const std::filesystem::path& path, std::span<const CleanComment> comments) {
  write_lines(path, comments, [](const CleanComment& c) {
    ordered_json j;
    j["id"] = c.id;
    j["platform"] = platform_key(c.platform);
    j["created_at"] = c.created_at;
    j["text"] = c.text;
    return j;
  });
}

}  // namespace alrn
