#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alrn/checkpoint.hpp"
#include "alrn/dataset.hpp"
#include "alrn/labeling.hpp"
#include "alrn/model.hpp"

namespace alrn {

inline constexpr int kMinEpochs = 10;

struct TrainConfig {
  int epochs = kMinEpochs;
  std::size_t batch_size = 16;
  double learning_rate = 5e-4;
  /// Encoder layers nearest the output to update; -1 means all of them.
  int trainable_layers = -1;
  std::uint64_t seed = 1;
  bool shuffle = true;
  /// Permits fewer than kMinEpochs epochs (tests, quick runs).
  bool allow_short = false;

  /// Throws ConfigError.
  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct TrainReport {
  std::string stage;  // "pretrain" or "customize"
  TrainConfig config;
  int trainable_layers = 0;
  bool noop = false;                 // n = 0: the base is returned untouched
  std::vector<double> epoch_loss;    // mean training loss per epoch (dropout on)
  double final_train_loss = 0.0;     // whole training set, dropout off
  double final_train_accuracy = 0.0; // percent, dropout off
  double duration_seconds = 0.0;     // wall clock; not part of serialized reports by default
  std::vector<std::string> dataset_fingerprints;
  std::size_t examples = 0;
};

struct EvalReport {
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;  // percent
  /// confusion[true][predicted], indexed by label code.
  std::array<std::array<std::size_t, kNumLabels>, kNumLabels> confusion{};
  std::array<double, kNumLabels> precision{};  // percent; 0 when nothing was predicted for the class
  std::array<double, kNumLabels> recall{};     // percent
  std::string test_fingerprint;
  std::optional<std::string> baseline_name;
  std::optional<double> baseline_accuracy;
  std::optional<double> improvement_points;    // acc - baseline
  std::optional<double> improvement_relative;  // (acc - baseline) / baseline * 100
};

/// Percentage-point and relative improvement of `accuracy` over `baseline`.
double improvement_points(double baseline, double accuracy) noexcept;
double improvement_relative(double baseline, double accuracy);

/// Fills the baseline fields of report from a baseline accuracy.
void attach_baseline(EvalReport& report, std::string name, double baseline_accuracy);

/// Trains every parameter of a freshly initialised model on a train split.
/// The result is tagged stage "base". Throws ValidationError for an empty or
/// non-train dataset.
Checkpoint pretrain_base(const LabeledDataset& generic_train, const Vocabulary& vocab, const ModelConfig& config,
                         const TrainConfig& tcfg, TrainReport* report = nullptr);

/// Updates only the trainable partition for tcfg.trainable_layers layers on
/// `dataset` (train split, never expert_consensus labels), encoded with the
/// base vocabulary. n = 0 returns the base exactly. Frozen tensors are never
/// written.
Checkpoint customize(const Checkpoint& base, const LabeledDataset& dataset, const TrainConfig& tcfg,
                     TrainReport* report = nullptr);
/// Pre-encoded variant; throws ValidationError if the data was encoded with a
/// different vocabulary or max_len than the base.
Checkpoint customize(const Checkpoint& base, const EncodedDataset& dataset, const TrainConfig& tcfg,
                     TrainReport* report = nullptr);

/// Accuracy, confusion matrix and per-class precision/recall with dropout
/// off. Throws ValidationError for an empty or non-test dataset and
/// ContaminationError if the test data is one the checkpoint was trained on.
EvalReport evaluate(const Checkpoint& model, const LabeledDataset& test,
                    const std::optional<EvalReport>& baseline = std::nullopt, std::string baseline_name = "base");

/// Predicted label codes for a batch of inputs.
std::vector<int> predict_labels(const Model& model, std::span<const TokenSequence> inputs);

struct SweepRow {
  int n = 0;
  std::size_t total_layers = 0;
  double accuracy = 0.0;
  double improvement_points = 0.0;
  double improvement_relative = 0.0;
};

/// One customize + evaluate per n (ascending, duplicates removed) from the
/// same base and seed. Errors are re-raised with the offending n prefixed.
std::vector<SweepRow> sweep_layers(const Checkpoint& base, const LabeledDataset& train, const LabeledDataset& test,
                                   std::span<const int> ns, const TrainConfig& tcfg);

struct SchemeRow {
  std::string scheme;  // "base", "y_to_xhat", "x_to_yhat"
  double accuracy = 0.0;
  double improvement_points = 0.0;
  double improvement_relative = 0.0;
  std::size_t train_size = 0;
};

struct SchemeComparison {
  std::vector<SchemeRow> rows;  // Base, y -> x-hat, x -> y-hat
  LabeledDataset labeled;       // x -> y-hat training set
  LabeledDataset generated;     // y -> x-hat training set
  std::size_t rejects = 0;
};

/// Builds an x -> y-hat training set by labeling `comments` through the
/// backend and a y -> x-hat set of the same size and class mix by asking the
/// backend to generate comments, customizes the base identically on each and
/// evaluates all three on `test`. Throws ValidationError if the two sets end
/// up with different sizes.
SchemeComparison compare_schemes(const Checkpoint& base, std::span<const CleanComment> comments,
                                 LabelerBackend& backend, const LabeledDataset& test, const TrainConfig& tcfg,
                                 const LabelerPolicy& policy = {});

/// Settings for the desk-scale experiments, read from the "experiment"
/// section of a synth spec file.
struct ExperimentConfig {
  ModelConfig model;
  int vocab_min_freq = 2;
  std::size_t vocab_max_size = 4000;
  TrainConfig pretrain;
  TrainConfig customize;
  std::vector<int> sweep_layers;
};

ExperimentConfig parse_experiment_config(std::string_view synth_spec_json);
const ExperimentConfig& builtin_experiment_config();

/// Vocabulary over the texts of the given datasets.
Vocabulary build_vocab(std::span<const LabeledDataset* const> datasets, int min_freq, std::size_t max_size);

}  // namespace alrn
