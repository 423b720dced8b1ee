#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "alrn/backend.hpp"
#include "alrn/dataset.hpp"
#include "alrn/labeling.hpp"

namespace alrn {

struct SynthSizes {
  std::size_t generic_train = 2400;
  std::size_t generic_test = 300;
  std::size_t domain_train = 600;
  std::size_t domain_pool = 600;
  std::size_t domain_test_per_class = 100;
};

/// Generator description for the synthetic oracle corpora. Generic sentences
/// carry sentiment through generic_lexicon words only; domain sentences draw
/// each sentiment unit from domain_lexicon (slang, topic bigrams) with
/// probability domain_injection_rate. The true label of a sentence is the
/// sign of its lexicon score: generic_lexicon for generic corpora, the union
/// of both lexicons for domain corpora.
struct SynthSpec {
  int version = 1;
  std::uint64_t seed = 1;
  Lexicon generic_lexicon;
  Lexicon domain_lexicon;
  std::vector<std::string> topic_words;     // neutral fillers and template slots
  std::vector<std::string> function_words;  // neutral fillers
  std::array<double, kNumLabels> class_priors{1.0 / 3, 1.0 / 3, 1.0 / 3};
  std::size_t min_words = 5;
  std::size_t max_words = 12;
  double noise_rate = 0.0;             // stored train labels flipped away from the oracle
  double domain_injection_rate = 0.8;
  double domain_filler_rate = 0.15;    // generic fillers replaced by single domain words
  double mixed_rate = 0.25;            // sentences carrying an opposing unit as well
  double annotator_error_rate = 0.1;   // per simulated expert
  double labeler_noise_rate = 0.05;    // mock backend
  SynthSizes sizes;
  TemplateSet templates;

  /// Throws ConfigError naming the first problem.
  void validate() const;
  /// Generic plus domain entries.
  Lexicon full_lexicon() const;
};

/// Parses the JSON spec format (see data/synth_spec_v1.json). Unknown
/// top-level keys are ignored so that other sections can live in the file.
SynthSpec parse_synth_spec(std::string_view json_text);
SynthSpec load_synth_spec(const std::filesystem::path& path);
const SynthSpec& builtin_synth_spec();

struct SynthCorpora {
  LabeledDataset generic_train;  // oracle labels (noised), source mock_lexicon
  LabeledDataset generic_test;   // oracle labels, split test
  LabeledDataset domain_train;   // oracle labels (noised), source mock_lexicon
  LabeledDataset domain_pool;    // further domain comments for x -> y-hat labeling and insights
  LabeledDataset domain_test;    // consensus of three noised annotators, balanced
};

/// Deterministic in (spec, seed). Every text is unique across all five sets.
SynthCorpora synth_corpus(const SynthSpec& spec, std::uint64_t seed);

/// Mock labeler configured from the spec: full lexicon, labeler noise, and
/// the generic word pools for the template generator.
MockBackendOptions mock_backend_options(const SynthSpec& spec, std::uint64_t seed);

}  // namespace alrn
