#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "alrn/http_backend.hpp"
#include "alrn/insights.hpp"
#include "alrn/labeling.hpp"
#include "alrn/model.hpp"
#include "alrn/synth.hpp"
#include "alrn/training.hpp"

namespace alrn::cli {

struct LabelerSettings {
  std::string backend = "mock";  // mock | http
  HttpBackendConfig http;
  LabelerPolicy policy;
  std::optional<double> mock_noise;  // default: the synth spec's labeler_noise_rate
  std::uint64_t seed = 1;
};

/// Everything a command needs. Built from compiled-in defaults, then the
/// config file, then command-line flags (later sources win).
struct RunConfig {
  std::filesystem::path out_dir = "alrn-out";
  std::optional<std::filesystem::path> stopwords;
  std::optional<std::filesystem::path> stemmer_rules;
  std::optional<std::filesystem::path> synth_spec;
  std::optional<std::filesystem::path> lexicon;
  bool keep_emoji = false;

  std::uint64_t synth_seed = 0;
  std::optional<SynthSizes> synth_sizes;  // overrides the spec's sizes

  ModelConfig model;
  int vocab_min_freq = 2;
  std::size_t vocab_max_size = 4000;
  TrainConfig pretrain;
  TrainConfig customize;
  std::vector<int> sweep_layers;

  LabelerSettings labeler;

  std::size_t top_k = 40;
  std::uint64_t cloud_seed = 1;
  WordCloudOptions cloud;

  /// Compiled-in defaults (the shipped synth spec's experiment section).
  static RunConfig defaults();

  /// Applies an INI file on top of this config. Unknown sections or keys and
  /// unparsable values raise ConfigError; a missing file raises IoError.
  void load_ini(const std::filesystem::path& path);

  /// Checks that referenced files exist and values are in range.
  void validate() const;

  // Resolved resources.
  TextPipeline pipeline() const;
  SynthSpec spec() const;
  MockBackendOptions mock_options() const;

  nlohmann::ordered_json to_json() const;
};

std::vector<int> parse_int_list(const std::string& text);

}  // namespace alrn::cli
