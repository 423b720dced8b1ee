#include "alrn/backend.hpp"

#include <unordered_set>

#include <fmt/format.h>

#include "alrn/error.hpp"
#include "alrn/rng.hpp"

namespace alrn {

MockBackend::MockBackend(MockBackendOptions options) : options_(std::move(options)) {
  if (options_.lexicon.empty()) throw ConfigError("mock backend: lexicon is empty");
  if (options_.noise_rate < 0 || options_.noise_rate > 1 || options_.garble_rate < 0 || options_.garble_rate > 1) {
    throw ConfigError("mock backend: rates must lie in [0, 1]");
  }
  bool any_template = false;
  for (const auto& t : options_.templates.by_label) any_template = any_template || !t.empty();
  if (!any_template) options_.templates = default_templates();
}

TemplateSet MockBackend::default_templates() {
  TemplateSet t;
  t.by_label[code(SentimentLabel::positive)] = {
      "i {pos} my {topic}",          "the {topic} is {pos}",           "{pos} {topic} this {topic}",
      "this {topic} was {pos} and {pos}", "so {pos} about the {topic}", "my {topic} feels {pos}",
  };
  t.by_label[code(SentimentLabel::negative)] = {
      "i {neg} my {topic}",          "the {topic} is {neg}",           "{neg} {topic} this {topic}",
      "this {topic} was {neg} and {neg}", "so {neg} about the {topic}", "my {topic} feels {neg}",
  };
  t.by_label[code(SentimentLabel::neutral)] = {
      "the {topic} is on {topic}", "i have a {topic} {topic}", "my {topic} and {topic}",
      "about the {topic} for {topic}", "this {topic} at {topic}", "just a {topic} {topic} today",
  };
  return t;
}

std::string MockBackend::label(std::string_view text) {
  std::uint64_t call = 0;
  if (options_.garble_rate > 0) {
    std::lock_guard lock(mutex_);
    auto it = label_calls_.find(text);
    if (it == label_calls_.end()) it = label_calls_.emplace(std::string(text), 0).first;
    call = it->second++;
  }
  const std::uint64_t key = mix64(options_.seed ^ hash64(text));
  if (options_.garble_rate > 0 && unit_interval(mix64(key + 0x51ed27 + call)) < options_.garble_rate) {
    return "It could be positive or negative.";
  }
  SentimentLabel l = mock_lexicon_label(text, options_.lexicon);
  const std::uint64_t noise = mix64(key ^ 0xa11ce);
  if (unit_interval(noise) < options_.noise_rate) {
    l = label_from_code((code(l) + 1 + static_cast<int>(mix64(noise) & 1)) % 3);
  }
  return std::string(label_name(l));
}

std::string MockBackend::generate(SentimentLabel label, std::size_t count) {
  std::uint64_t call = 0;
  {
    std::lock_guard lock(mutex_);
    call = generate_calls_[static_cast<std::size_t>(code(label))]++;
  }
  const auto& templates = options_.templates.by_label[static_cast<std::size_t>(code(label))];
  if (templates.empty()) throw BackendFatalError(fmt::format("mock backend: no templates for {}", label_key(label)));
  Rng rng = Rng(options_.seed).split(0x9e4e + 16 * call + static_cast<std::uint64_t>(code(label)));

  auto pick = [&](const std::vector<std::string>& pool, const char* slot) -> const std::string& {
    if (pool.empty()) throw BackendFatalError(fmt::format("mock backend: empty word pool for {}", slot));
    return pool[rng.below(pool.size())];
  };
  auto fill = [&](const std::string& tmpl) {
    std::string out;
    for (std::size_t i = 0; i < tmpl.size();) {
      if (tmpl.compare(i, 5, "{pos}") == 0) {
        out += pick(options_.positive_words, "{pos}");
        i += 5;
      } else if (tmpl.compare(i, 5, "{neg}") == 0) {
        out += pick(options_.negative_words, "{neg}");
        i += 5;
      } else if (tmpl.compare(i, 7, "{topic}") == 0) {
        out += pick(options_.topic_words, "{topic}");
        i += 7;
      } else {
        out += tmpl[i++];
      }
    }
    return out;
  };

  std::unordered_set<std::string> seen;
  std::string response;
  const std::size_t max_tries = 50 * count + 100;
  for (std::size_t tries = 0; seen.size() < count && tries < max_tries; ++tries) {
    std::string line = fill(templates[rng.below(templates.size())]);
    if (seen.insert(line).second) response += line + "\n";
  }
  return response;
}

std::string MockBackend::describe() const {
  return fmt::format("mock(seed={}, noise={}, garble={})", options_.seed, options_.noise_rate, options_.garble_rate);
}

}  // namespace alrn
