#include "alrn/labeling.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <fmt/format.h>

#include "alrn/error.hpp"
#include "alrn/text.hpp"

namespace alrn {

std::string label_prompt(std::string_view text) {
  return fmt::format(
      "Classify the sentiment of the following social media comment about adult learning. "
      "Answer with exactly one word: Positive, Negative, or Neutral.\nComment: \"{}\"",
      text);
}

std::string generate_prompt(SentimentLabel label, std::size_t count) {
  return fmt::format(
      "Write {} different short social media comments about adult learning that express {} sentiment. "
      "Put one comment per line with no numbering.",
      count, label_key(label));
}

std::optional<SentimentLabel> parse_label_response(std::string_view response) {
  std::optional<SentimentLabel> found;
  std::string lowered;
  lowered.reserve(response.size());
  for (char c : response) lowered.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
  auto is_letter = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
  for (SentimentLabel l : kAllLabels) {
    std::string_view word = label_key(l);
    for (std::size_t pos = lowered.find(word); pos != std::string::npos; pos = lowered.find(word, pos + 1)) {
      bool left_ok = pos == 0 || !is_letter(lowered[pos - 1]);
      bool right_ok = pos + word.size() == lowered.size() || !is_letter(lowered[pos + word.size()]);
      if (left_ok && right_ok) {
        if (found && *found != l) return std::nullopt;
        found = l;
        break;
      }
    }
  }
  return found;
}

LabelRun llm_label(std::span<const CleanComment> comments, LabelerBackend& backend, const LabelerPolicy& policy) {
  if (policy.max_attempts < 1) throw ConfigError("labeler max_attempts must be at least 1");
  const std::size_t n = comments.size();
  std::vector<std::optional<SentimentLabel>> labels(n);
  std::vector<LabelReject> failures(n);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;

  auto worker = [&] {
    for (;;) {
      if (abort.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      LabelReject& failure = failures[i];
      for (int attempt = 1; attempt <= policy.max_attempts && !abort.load(); ++attempt) {
        failure.attempts = attempt;
        try {
          std::string response = backend.label(comments[i].text);
          if (auto l = parse_label_response(response)) {
            labels[i] = l;
            break;
          }
          failure.last_error = fmt::format("unparseable response '{}'", response.substr(0, 80));
        } catch (const BackendFatalError&) {
          std::lock_guard lock(fatal_mutex);
          if (!fatal) fatal = std::current_exception();
          abort = true;
          return;
        } catch (const BackendError& e) {
          failure.last_error = e.what();
        } catch (...) {
          std::lock_guard lock(fatal_mutex);
          if (!fatal) fatal = std::current_exception();
          abort = true;
          return;
        }
      }
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(policy.max_in_flight, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (fatal) std::rethrow_exception(fatal);

  LabelRun run;
  run.dataset.split = Split::train;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i]) {
      run.dataset.examples.push_back({comments[i], *labels[i], LabelSource::llm});
    } else {
      failures[i].index = i;
      failures[i].id = comments[i].id;
      run.rejects.push_back(std::move(failures[i]));
    }
  }
  return run;
}

namespace {

std::string strip_list_marker(std::string_view line) {
  std::size_t i = 0;
  auto skip_spaces = [&] {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  };
  skip_spaces();
  std::size_t d = i;
  while (d < line.size() && line[d] >= '0' && line[d] <= '9') ++d;
  if (d > i && d < line.size() && (line[d] == '.' || line[d] == ')')) {
    i = d + 1;
  } else if (i < line.size() && (line[i] == '-' || line[i] == '*')) {
    ++i;
  } else if (line.substr(i).starts_with("•")) {
    i += 3;
  }
  skip_spaces();
  std::string_view rest = line.substr(i);
  while (!rest.empty() && (rest.back() == ' ' || rest.back() == '\t' || rest.back() == '\r')) rest.remove_suffix(1);
  if (rest.size() >= 2 && rest.front() == '"' && rest.back() == '"') rest = rest.substr(1, rest.size() - 2);
  return std::string(rest);
}

}  // namespace

GenerateRun llm_generate(SentimentLabel label, std::size_t count, LabelerBackend& backend,
                         const LabelerPolicy& policy, std::string_view id_prefix, const TextPipeline& pipeline) {
  if (count < 1) throw ValidationError("llm_generate: count must be at least 1");
  if (policy.max_attempts < 1) throw ConfigError("labeler max_attempts must be at least 1");
  GenerateRun run;
  std::unordered_set<std::string> seen;
  for (int attempt = 0; attempt < policy.max_attempts && run.examples.size() < count; ++attempt) {
    std::string response;
    try {
      response = backend.generate(label, count - run.examples.size());
    } catch (const BackendFatalError&) {
      throw;
    } catch (const BackendError&) {
      continue;
    }
    std::istringstream lines(response);
    std::string line;
    while (std::getline(lines, line) && run.examples.size() < count) {
      std::string cleaned = pipeline.clean(strip_list_marker(line));
      if (cleaned.empty() || !seen.insert(cleaned).second) {
        ++run.bad_lines;
        continue;
      }
      CleanComment c;
      c.id = fmt::format("{}-{}-{:05}", id_prefix, label_key(label), run.examples.size());
      c.platform = Platform::synthetic;
      c.created_at = "1970-01-01T00:00:00Z";
      c.word_tokens = pipeline.word_tokens(cleaned);
      c.text = std::move(cleaned);
      run.examples.push_back({std::move(c), label, LabelSource::synthetic_generator});
    }
  }
  run.shortfall = count - run.examples.size();
  return run;
}

Lexicon parse_lexicon(std::string_view text) {
  Lexicon lex;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    std::size_t sep = line.find_last_of(" \t");
    if (sep == std::string::npos || sep < start) throw ParseError(lineno, "expected '<word> <value>'");
    std::string key = line.substr(start, sep - start);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    std::string value = line.substr(sep + 1);
    int v = 0;
    if (value == "+1" || value == "1") v = 1;
    else if (value == "-1") v = -1;
    else throw ParseError(lineno, fmt::format("lexicon value '{}' is not +1 or -1", value));
    if (text::has_upper(key)) throw ParseError(lineno, fmt::format("lexicon entry '{}' is not lowercase", key));
    lex[key] = v;
  }
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read lexicon '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_lexicon(buf.str());
}

int lexicon_score(std::span<const std::string> words, const Lexicon& lexicon) {
  int score = 0;
  std::string pair;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (auto it = lexicon.find(words[i]); it != lexicon.end()) score += it->second;
    if (i + 1 < words.size()) {
      pair.assign(words[i]).append(" ").append(words[i + 1]);
      if (auto it = lexicon.find(pair); it != lexicon.end()) score += it->second;
    }
  }
  return score;
}

SentimentLabel mock_lexicon_label(std::string_view text, const Lexicon& lexicon) {
  if (lexicon.empty()) throw ValidationError("mock_lexicon_label: lexicon is empty");
  const auto words = text::split_words(text::clean_text(text));
  const int score = lexicon_score(words, lexicon);
  if (score > 0) return SentimentLabel::positive;
  if (score < 0) return SentimentLabel::negative;
  return SentimentLabel::neutral;
}

std::optional<SentimentLabel> consensus(SentimentLabel a, SentimentLabel b, SentimentLabel c) noexcept {
  if (a == b && b == c) return a;
  return std::nullopt;
}

LabeledDataset build_test_set(std::span<const ConsensusItem> stream, std::size_t per_class) {
  if (per_class < 1) throw ValidationError("build_test_set: per_class must be at least 1");
  LabeledDataset out;
  out.split = Split::test;
  std::array<std::size_t, kNumLabels> have{};
  std::size_t full = 0;
  for (const auto& [comment, label] : stream) {
    if (full == kNumLabels) break;
    if (!label) continue;
    std::size_t& slot = have[static_cast<std::size_t>(code(*label))];
    if (slot == per_class) continue;
    out.examples.push_back({comment, *label, LabelSource::expert_consensus});
    if (++slot == per_class) ++full;
  }
  if (full < kNumLabels) {
    std::string detail;
    for (SentimentLabel l : kAllLabels) {
      std::size_t got = have[static_cast<std::size_t>(code(l))];
      if (got < per_class) {
        detail += fmt::format("{}{} short by {}", detail.empty() ? "" : ", ", label_name(l), per_class - got);
      }
    }
    throw ValidationError(fmt::format("test set quota of {} per class not met: {}", per_class, detail));
  }
  return out;
}

}  // namespace alrn
