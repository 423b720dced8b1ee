#include "alrn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

#include "alrn/embedded_data.hpp"
#include "alrn/error.hpp"
#include "alrn/rng.hpp"
#include "alrn/text.hpp"

namespace alrn {

using nlohmann::json;

namespace {

bool is_word_sequence(const std::string& entry, std::size_t max_words) {
  const auto words = text::split_words(entry);
  if (words.empty() || words.size() > max_words || text::has_upper(entry)) return false;
  std::string joined;
  for (const auto& w : words) joined += (joined.empty() ? "" : " ") + w;
  return joined == entry;
}

std::vector<std::string> string_list(const json& j, const char* key) {
  if (!j.contains(key)) return {};
  return j.at(key).get<std::vector<std::string>>();
}

void add_polarity(Lexicon& lex, const json& j, const char* section) {
  if (!j.contains(section)) return;
  const json& s = j.at(section);
  for (const auto& w : string_list(s, "positive")) lex[w] = 1;
  for (const auto& w : string_list(s, "negative")) lex[w] = -1;
}

}  // namespace

void SynthSpec::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("synth spec: " + msg); };
  if (version != 1) fail(fmt::format("unsupported version {}", version));
  if (generic_lexicon.empty()) fail("generic lexicon is empty");
  if (domain_lexicon.empty()) fail("domain lexicon is empty");
  bool gen_pos = false, gen_neg = false;
  for (const auto& [w, v] : generic_lexicon) {
    if (!is_word_sequence(w, 1)) fail(fmt::format("generic entry '{}' must be one lowercase word", w));
    if (v != 1 && v != -1) fail(fmt::format("generic entry '{}' has value {}", w, v));
    (v > 0 ? gen_pos : gen_neg) = true;
  }
  if (!gen_pos || !gen_neg) fail("generic lexicon needs positive and negative entries");
  bool dom_pos = false, dom_neg = false;
  for (const auto& [w, v] : domain_lexicon) {
    if (!is_word_sequence(w, 2)) fail(fmt::format("domain entry '{}' must be one or two lowercase words", w));
    if (generic_lexicon.contains(w)) fail(fmt::format("'{}' is in both lexicons", w));
    (v > 0 ? dom_pos : dom_neg) = true;
  }
  if (!dom_pos || !dom_neg) fail("domain lexicon needs positive and negative entries");
  if (topic_words.empty() || function_words.empty()) fail("topic_words and function_words must be non-empty");
  for (const auto* list : {&topic_words, &function_words}) {
    for (const auto& w : *list) {
      if (!is_word_sequence(w, 1)) fail(fmt::format("filler '{}' must be one lowercase word", w));
      if (generic_lexicon.contains(w) || domain_lexicon.contains(w)) {
        fail(fmt::format("filler '{}' is a lexicon entry", w));
      }
    }
  }
  double total = 0;
  for (double p : class_priors) {
    if (!(p >= 0)) fail("class priors must be non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) fail(fmt::format("class priors sum to {}, not 1", total));
  if (min_words < 3 || min_words > max_words) fail("length range must satisfy 3 <= min <= max");
  for (auto [name, rate] : {std::pair{"noise_rate", noise_rate}, {"domain_injection_rate", domain_injection_rate},
                            {"domain_filler_rate", domain_filler_rate}, {"mixed_rate", mixed_rate},
                            {"annotator_error_rate", annotator_error_rate}, {"labeler_noise_rate", labeler_noise_rate}}) {
    if (!(rate >= 0 && rate <= 1)) fail(fmt::format("{} must lie in [0, 1]", name));
  }
  if (annotator_error_rate >= 0.5) fail("annotator_error_rate must be below 0.5");
  if (sizes.generic_train == 0 || sizes.generic_test == 0 || sizes.domain_train == 0 || sizes.domain_pool == 0 ||
      sizes.domain_test_per_class == 0) {
    fail("all sizes must be positive");
  }
}

Lexicon SynthSpec::full_lexicon() const {
  Lexicon out = generic_lexicon;
  out.insert(domain_lexicon.begin(), domain_lexicon.end());
  return out;
}

SynthSpec parse_synth_spec(std::string_view json_text) {
  SynthSpec spec;
  try {
    const json j = json::parse(json_text);
    spec.version = j.value("version", 1);
    spec.seed = j.value("seed", std::uint64_t{1});
    add_polarity(spec.generic_lexicon, j, "generic_lexicon");
    add_polarity(spec.domain_lexicon, j, "domain_lexicon");
    spec.topic_words = string_list(j, "topic_words");
    spec.function_words = string_list(j, "function_words");
    if (j.contains("class_priors")) {
      const json& p = j.at("class_priors");
      for (SentimentLabel l : kAllLabels) {
        spec.class_priors[static_cast<std::size_t>(code(l))] = p.at(std::string(label_key(l))).get<double>();
      }
    }
    if (j.contains("length")) {
      spec.min_words = j.at("length").at("min").get<std::size_t>();
      spec.max_words = j.at("length").at("max").get<std::size_t>();
    }
    spec.noise_rate = j.value("noise_rate", spec.noise_rate);
    spec.domain_injection_rate = j.value("domain_injection_rate", spec.domain_injection_rate);
    spec.domain_filler_rate = j.value("domain_filler_rate", spec.domain_filler_rate);
    spec.mixed_rate = j.value("mixed_rate", spec.mixed_rate);
    spec.annotator_error_rate = j.value("annotator_error_rate", spec.annotator_error_rate);
    spec.labeler_noise_rate = j.value("labeler_noise_rate", spec.labeler_noise_rate);
    if (j.contains("sizes")) {
      const json& s = j.at("sizes");
      spec.sizes.generic_train = s.value("generic_train", spec.sizes.generic_train);
      spec.sizes.generic_test = s.value("generic_test", spec.sizes.generic_test);
      spec.sizes.domain_train = s.value("domain_train", spec.sizes.domain_train);
      spec.sizes.domain_pool = s.value("domain_pool", spec.sizes.domain_pool);
      spec.sizes.domain_test_per_class = s.value("domain_test_per_class", spec.sizes.domain_test_per_class);
    }
    if (j.contains("templates")) {
      for (SentimentLabel l : kAllLabels) {
        spec.templates.by_label[static_cast<std::size_t>(code(l))] =
            string_list(j.at("templates"), std::string(label_key(l)).c_str());
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("synth spec: {}", e.what()));
  }
  spec.validate();
  return spec;
}

SynthSpec load_synth_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read synth spec '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_synth_spec(buf.str());
}

const SynthSpec& builtin_synth_spec() {
  static const SynthSpec spec = parse_synth_spec(embedded::synth_spec_v1());
  return spec;
}

namespace {

using Unit = std::vector<std::string>;

class SentenceGenerator {
 public:
  SentenceGenerator(const SynthSpec& spec, bool domain) : spec_(spec), domain_(domain) {
    for (const auto& [w, v] : spec.generic_lexicon) (v > 0 ? generic_pos_ : generic_neg_).push_back({w});
    for (const auto& [w, v] : spec.domain_lexicon) {
      Unit u = text::split_words(w);
      if (u.size() == 1) domain_single_.push_back(w);
      (v > 0 ? domain_pos_ : domain_neg_).push_back(std::move(u));
    }
    fillers_ = spec.topic_words;
    fillers_.insert(fillers_.end(), spec.function_words.begin(), spec.function_words.end());
  }

  std::vector<std::string> make(SentimentLabel target, Rng& rng) const {
    const std::size_t length = spec_.min_words + rng.below(spec_.max_words - spec_.min_words + 1);
    std::vector<Unit> units;
    auto unit = [&](bool positive) {
      const bool use_domain = domain_ && rng.bernoulli(spec_.domain_injection_rate);
      const auto& pool = use_domain ? (positive ? domain_pos_ : domain_neg_) : (positive ? generic_pos_ : generic_neg_);
      units.push_back(pool[rng.below(pool.size())]);
    };
    if (target == SentimentLabel::neutral) {
      if (rng.bernoulli(spec_.mixed_rate)) {
        unit(true);
        unit(false);
      }
    } else {
      const bool positive = target == SentimentLabel::positive;
      unit(positive);
      if (rng.bernoulli(0.35)) unit(positive);
      if (rng.bernoulli(spec_.mixed_rate)) {
        unit(positive);
        unit(!positive);
      }
    }
    std::size_t unit_words = 0;
    for (const Unit& u : units) unit_words += u.size();

    std::vector<Unit> items;
    for (std::size_t i = unit_words; i < length; ++i) {
      if (!domain_ && !domain_single_.empty() && rng.bernoulli(spec_.domain_filler_rate)) {
        items.push_back({domain_single_[rng.below(domain_single_.size())]});
      } else {
        items.push_back({fillers_[rng.below(fillers_.size())]});
      }
    }
    for (Unit& u : units) {
      const std::size_t at = rng.below(items.size() + 1);
      items.insert(items.begin() + static_cast<std::ptrdiff_t>(at), std::move(u));
    }
    std::vector<std::string> words;
    for (Unit& u : items) {
      for (std::string& w : u) words.push_back(std::move(w));
    }
    return words;
  }

 private:
  const SynthSpec& spec_;
  bool domain_;
  std::vector<Unit> generic_pos_, generic_neg_, domain_pos_, domain_neg_;
  std::vector<std::string> domain_single_;
  std::vector<std::string> fillers_;
};

SentimentLabel oracle_label(std::span<const std::string> words, const Lexicon& lexicon) {
  const int s = lexicon_score(words, lexicon);
  return s > 0 ? SentimentLabel::positive : s < 0 ? SentimentLabel::negative : SentimentLabel::neutral;
}

SentimentLabel other_label(SentimentLabel l, Rng& rng) {
  return label_from_code((code(l) + 1 + static_cast<int>(rng.below(2))) % 3);
}

class CorpusBuilder {
 public:
  CorpusBuilder(const SynthSpec& spec, std::uint64_t seed)
      : spec_(spec), root_(seed), generic_(spec, false), domain_(spec, true), full_(spec.full_lexicon()) {}

  // Quotas by largest remainder so that the counts sum to size.
  std::vector<SentimentLabel> targets(std::size_t size, Rng& rng) const {
    std::array<std::size_t, kNumLabels> count{};
    std::array<double, kNumLabels> rem{};
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < kNumLabels; ++c) {
      const double exact = spec_.class_priors[c] * static_cast<double>(size);
      count[c] = static_cast<std::size_t>(std::floor(exact));
      rem[c] = exact - static_cast<double>(count[c]);
      assigned += count[c];
    }
    while (assigned < size) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < kNumLabels; ++c) {
        if (rem[c] > rem[best]) best = c;
      }
      ++count[best];
      rem[best] = -1;
      ++assigned;
    }
    std::vector<SentimentLabel> out;
    for (std::size_t c = 0; c < kNumLabels; ++c) out.insert(out.end(), count[c], label_from_code(static_cast<int>(c)));
    rng.shuffle(std::span(out));
    return out;
  }

  // A fresh sentence whose oracle label is target.
  CleanComment sentence(bool domain, SentimentLabel target, Rng& rng, const std::string& id) {
    const auto& gen = domain ? domain_ : generic_;
    const Lexicon& lex = domain ? full_ : spec_.generic_lexicon;
    for (int attempt = 0; attempt < 10000; ++attempt) {
      auto words = gen.make(target, rng);
      if (oracle_label(words, lex) != target) continue;
      std::string joined;
      for (const auto& w : words) joined += (joined.empty() ? "" : " ") + w;
      std::string cleaned = pipeline().clean(joined);
      if (cleaned.empty() || !texts_.insert(cleaned).second) continue;
      CleanComment c;
      c.id = id;
      c.platform = Platform::synthetic;
      c.created_at = "2023-01-01T00:00:00Z";
      c.word_tokens = pipeline().word_tokens(cleaned);
      c.text = std::move(cleaned);
      return c;
    }
    throw ConfigError(fmt::format("synth spec cannot produce a new {} {} sentence", domain ? "domain" : "generic",
                                  label_key(target)));
  }

  LabeledDataset labeled(bool domain, std::size_t size, Split split, double noise, std::uint64_t stream,
                         const char* prefix) {
    Rng rng = root_.split(stream);
    Rng noise_rng = root_.split(stream + 100);
    LabeledDataset out;
    out.split = split;
    const auto order = targets(size, rng);
    for (std::size_t i = 0; i < order.size(); ++i) {
      CleanComment c = sentence(domain, order[i], rng, fmt::format("{}-{:05}", prefix, i));
      SentimentLabel stored = order[i];
      if (noise > 0 && noise_rng.bernoulli(noise)) stored = other_label(stored, noise_rng);
      out.examples.push_back({std::move(c), stored, LabelSource::mock_lexicon});
    }
    return out;
  }

  LabeledDataset consensus_test(std::uint64_t stream) {
    Rng rng = root_.split(stream);
    Rng annot = root_.split(stream + 100);
    const std::size_t per_class = spec_.sizes.domain_test_per_class;
    std::vector<ConsensusItem> items;
    std::array<std::size_t, kNumLabels> accepted{};
    auto done = [&] {
      return std::all_of(accepted.begin(), accepted.end(), [&](std::size_t a) { return a >= per_class; });
    };
    const std::size_t cap = 1000 * per_class;
    for (std::size_t i = 0; !done() && i < cap; ++i) {
      // Class drawn from the priors.
      double u = rng.uniform();
      std::size_t c = 0;
      while (c + 1 < kNumLabels && u >= spec_.class_priors[c]) u -= spec_.class_priors[c++];
      const SentimentLabel truth = label_from_code(static_cast<int>(c));
      CleanComment comment = sentence(true, truth, rng, fmt::format("dte-{:05}", i));
      std::array<SentimentLabel, 3> votes{};
      for (auto& v : votes) v = annot.bernoulli(spec_.annotator_error_rate) ? other_label(truth, annot) : truth;
      auto agreed = consensus(votes[0], votes[1], votes[2]);
      if (agreed) ++accepted[static_cast<std::size_t>(code(*agreed))];
      items.emplace_back(std::move(comment), agreed);
    }
    return build_test_set(items, per_class);
  }

 private:
  static const TextPipeline& pipeline() { return TextPipeline::builtin(); }

  const SynthSpec& spec_;
  Rng root_;
  SentenceGenerator generic_;
  SentenceGenerator domain_;
  Lexicon full_;
  std::unordered_set<std::string> texts_;
};

}  // namespace

SynthCorpora synth_corpus(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  CorpusBuilder b(spec, seed);
  SynthCorpora out;
  const auto& s = spec.sizes;
  out.generic_train = b.labeled(false, s.generic_train, Split::train, spec.noise_rate, 1, "gtr");
  out.generic_test = b.labeled(false, s.generic_test, Split::test, 0.0, 2, "gte");
  out.domain_train = b.labeled(true, s.domain_train, Split::train, spec.noise_rate, 3, "dtr");
  out.domain_pool = b.labeled(true, s.domain_pool, Split::train, 0.0, 4, "dpo");
  out.domain_test = b.consensus_test(5);
  return out;
}

MockBackendOptions mock_backend_options(const SynthSpec& spec, std::uint64_t seed) {
  MockBackendOptions o;
  o.lexicon = spec.full_lexicon();
  o.noise_rate = spec.labeler_noise_rate;
  o.seed = seed;
  o.templates = spec.templates;
  for (const auto& [w, v] : spec.generic_lexicon) (v > 0 ? o.positive_words : o.negative_words).push_back(w);
  o.topic_words = spec.topic_words;
  return o;
}

}  // namespace alrn
