#include "alrn/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <json.hpp>

#include "alrn/adam.hpp"
#include "alrn/embedded_data.hpp"
#include "alrn/error.hpp"
#include "alrn/rng.hpp"

namespace alrn {

namespace {

constexpr std::size_t kEvalBatch = 64;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct FitResult {
  std::vector<double> epoch_loss;
  double final_loss = 0.0;
  double final_accuracy = 0.0;
};

// Eval-mode loss and accuracy over a whole encoded dataset.
std::pair<double, double> eval_loss_accuracy(const Model& model, const EncodedDataset& data) {
  double loss_sum = 0.0;
  std::size_t correct = 0;
  const std::size_t n = data.inputs.size();
  for (std::size_t start = 0; start < n; start += kEvalBatch) {
    const std::size_t len = std::min(kEvalBatch, n - start);
    std::span<const TokenSequence> inputs(data.inputs.data() + start, len);
    std::span<const int> labels(data.labels.data() + start, len);
    const Tensor logits = forward(model, inputs);
    loss_sum += cross_entropy(logits, labels) * static_cast<double>(len);
    for (std::size_t i = 0; i < len; ++i) {
      if (code(prediction_from_logits(logits.row(i)).label) == labels[i]) ++correct;
    }
  }
  return {loss_sum / static_cast<double>(n), 100.0 * static_cast<double>(correct) / static_cast<double>(n)};
}

// Minimises mean cross-entropy over the trainable partition of model.
FitResult fit(Model& model, const EncodedDataset& data, const TrainConfig& tcfg) {
  const std::size_t n = data.inputs.size();
  Rng root(tcfg.seed);
  Rng order_rng = root.split(1);
  Rng dropout_rng = root.split(2);
  AdamState state(AdamHyperparameters{tcfg.learning_rate});

  std::vector<std::pair<std::string, Tensor*>> params;
  for (ParamRef& p : model.parameters()) {
    if (model.is_trainable(p.group, p.layer)) params.emplace_back(p.name, p.tensor);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<TokenSequence> batch;
  std::vector<int> labels;

  FitResult result;
  for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
    if (tcfg.shuffle) order_rng.shuffle(std::span(order));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += tcfg.batch_size) {
      const std::size_t len = std::min(tcfg.batch_size, n - start);
      batch.clear();
      labels.clear();
      for (std::size_t i = start; i < start + len; ++i) {
        batch.push_back(data.inputs[order[i]]);
        labels.push_back(data.labels[order[i]]);
      }
      Tape tape;
      ForwardOptions opts{true, &dropout_rng, WatchMode::trainable};
      Var logits = forward(tape, model, batch, opts);
      Var loss = cross_entropy(logits, labels);
      Gradients grads = tape.backward(loss);
      adam_step(state, params, grads);
      loss_sum += loss.value().item() * static_cast<double>(len);
    }
    const double mean = loss_sum / static_cast<double>(n);
    if (!std::isfinite(mean)) throw ValidationError(fmt::format("training diverged at epoch {}", epoch + 1));
    result.epoch_loss.push_back(mean);
  }
  std::tie(result.final_loss, result.final_accuracy) = eval_loss_accuracy(model, data);
  return result;
}

void check_train_split(const LabeledDataset& d, const char* what) {
  if (d.empty()) throw ValidationError(fmt::format("{}: training dataset is empty", what));
  if (d.split != Split::train) throw ValidationError(fmt::format("{}: dataset split must be train", what));
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError(fmt::format("epochs must be at least 1 (got {})", epochs));
  if (epochs < kMinEpochs && !allow_short) {
    throw ConfigError(fmt::format("epochs {} is below the minimum of {}; set allow_short to override", epochs,
                                  kMinEpochs));
  }
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(learning_rate > 0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be positive");
  if (trainable_layers < -1) throw ConfigError("trainable_layers must be -1 (all) or between 0 and n_layers");
}

double improvement_points(double baseline, double accuracy) noexcept { return accuracy - baseline; }

double improvement_relative(double baseline, double accuracy) {
  if (baseline == 0.0) throw ValidationError("relative improvement is undefined for a baseline accuracy of 0");
  return (accuracy - baseline) / baseline * 100.0;
}

void attach_baseline(EvalReport& report, std::string name, double baseline_accuracy) {
  report.baseline_name = std::move(name);
  report.baseline_accuracy = baseline_accuracy;
  report.improvement_points = improvement_points(baseline_accuracy, report.accuracy);
  report.improvement_relative = improvement_relative(baseline_accuracy, report.accuracy);
}

Checkpoint pretrain_base(const LabeledDataset& generic_train, const Vocabulary& vocab, const ModelConfig& config,
                         const TrainConfig& tcfg, TrainReport* report) {
  const auto start = Clock::now();
  check_train_split(generic_train, "pretrain");
  tcfg.validate();
  ModelConfig cfg = config;
  cfg.vocab_size = vocab.size();
  Checkpoint ckpt{init_model(cfg), vocab, {}};
  const EncodedDataset data = encode_dataset(generic_train, vocab, cfg.max_len);
  FitResult fitted = fit(ckpt.model, data, tcfg);
  ckpt.metadata = {"base", tcfg.epochs, tcfg.seed, {data.fingerprint}};
  if (report) {
    *report = {};
    report->stage = "pretrain";
    report->config = tcfg;
    report->trainable_layers = static_cast<int>(cfg.n_layers);
    report->epoch_loss = std::move(fitted.epoch_loss);
    report->final_train_loss = fitted.final_loss;
    report->final_train_accuracy = fitted.final_accuracy;
    report->dataset_fingerprints = {data.fingerprint};
    report->examples = data.inputs.size();
    report->duration_seconds = seconds_since(start);
  }
  return ckpt;
}

Checkpoint customize(const Checkpoint& base, const EncodedDataset& data, const TrainConfig& tcfg,
                     TrainReport* report) {
  const auto start = Clock::now();
  tcfg.validate();
  const auto& cfg = base.model.config();
  const int n = tcfg.trainable_layers < 0 ? static_cast<int>(cfg.n_layers) : tcfg.trainable_layers;
  Model model = base.model;
  model.set_trainable(n);  // range check
  if (data.inputs.empty()) throw ValidationError("customize: training dataset is empty");
  if (data.inputs.size() != data.labels.size()) throw ValidationError("customize: inputs and labels differ in length");
  if (data.vocab_digest != vocab_digest(base.vocab)) {
    throw ValidationError("customize: dataset was encoded with a different vocabulary than the base checkpoint");
  }
  for (const TokenSequence& s : data.inputs) {
    if (s.ids.size() != cfg.max_len) {
      throw ValidationError(fmt::format("customize: sequence length {} does not match max_len {}", s.ids.size(),
                                        cfg.max_len));
    }
  }
  if (report) {
    *report = {};
    report->stage = "customize";
    report->config = tcfg;
    report->trainable_layers = n;
    report->dataset_fingerprints = {data.fingerprint};
    report->examples = data.inputs.size();
  }
  if (n == 0) {
    if (report) {
      report->noop = true;
      std::tie(report->final_train_loss, report->final_train_accuracy) = eval_loss_accuracy(base.model, data);
      report->duration_seconds = seconds_since(start);
    }
    return base;
  }

  FitResult fitted = fit(model, data, tcfg);
  Checkpoint out{std::move(model), base.vocab, base.metadata};
  out.metadata.stage = "customized";
  out.metadata.epochs_run += tcfg.epochs;
  out.metadata.seed = tcfg.seed;
  out.metadata.dataset_fingerprints.push_back(data.fingerprint);
  if (report) {
    report->epoch_loss = std::move(fitted.epoch_loss);
    report->final_train_loss = fitted.final_loss;
    report->final_train_accuracy = fitted.final_accuracy;
    report->duration_seconds = seconds_since(start);
  }
  return out;
}

Checkpoint customize(const Checkpoint& base, const LabeledDataset& dataset, const TrainConfig& tcfg,
                     TrainReport* report) {
  check_train_split(dataset, "customize");
  for (const LabeledExample& e : dataset.examples) {
    if (e.source == LabelSource::expert_consensus) {
      throw ValidationError(fmt::format("customize: example '{}' carries an expert_consensus label, which is "
                                        "reserved for test data",
                                        e.comment.id));
    }
  }
  return customize(base, encode_dataset(dataset, base.vocab, base.model.config().max_len), tcfg, report);
}

std::vector<int> predict_labels(const Model& model, std::span<const TokenSequence> inputs) {
  std::vector<int> out;
  out.reserve(inputs.size());
  for (std::size_t start = 0; start < inputs.size(); start += kEvalBatch) {
    const std::size_t len = std::min(kEvalBatch, inputs.size() - start);
    const Tensor logits = forward(model, inputs.subspan(start, len));
    for (std::size_t i = 0; i < len; ++i) out.push_back(code(prediction_from_logits(logits.row(i)).label));
  }
  return out;
}

EvalReport evaluate(const Checkpoint& ckpt, const LabeledDataset& test, const std::optional<EvalReport>& baseline,
                    std::string baseline_name) {
  if (test.empty()) throw ValidationError("evaluate: test dataset is empty");
  if (test.split != Split::test) throw ValidationError("evaluate: dataset split must be test");
  const std::string fp = test.fingerprint();
  const auto& trained = ckpt.metadata.dataset_fingerprints;
  if (std::find(trained.begin(), trained.end(), fp) != trained.end()) {
    throw ContaminationError(fmt::format("evaluate: test dataset {} was used to train this checkpoint", fp.substr(0, 12)));
  }
  const EncodedDataset data = encode_dataset(test, ckpt.vocab, ckpt.model.config().max_len);
  const std::vector<int> predicted = predict_labels(ckpt.model, data.inputs);

  EvalReport r;
  r.total = predicted.size();
  r.test_fingerprint = fp;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    ++r.confusion[static_cast<std::size_t>(data.labels[i])][static_cast<std::size_t>(predicted[i])];
    if (predicted[i] == data.labels[i]) ++r.correct;
  }
  r.accuracy = 100.0 * static_cast<double>(r.correct) / static_cast<double>(r.total);
  for (std::size_t c = 0; c < kNumLabels; ++c) {
    std::size_t row = 0, col = 0;
    for (std::size_t k = 0; k < kNumLabels; ++k) {
      row += r.confusion[c][k];
      col += r.confusion[k][c];
    }
    r.precision[c] = col == 0 ? 0.0 : 100.0 * static_cast<double>(r.confusion[c][c]) / static_cast<double>(col);
    r.recall[c] = row == 0 ? 0.0 : 100.0 * static_cast<double>(r.confusion[c][c]) / static_cast<double>(row);
  }
  if (baseline) attach_baseline(r, std::move(baseline_name), baseline->accuracy);
  return r;
}

std::vector<SweepRow> sweep_layers(const Checkpoint& base, const LabeledDataset& train, const LabeledDataset& test,
                                   std::span<const int> ns, const TrainConfig& tcfg) {
  std::vector<int> sorted(ns.begin(), ns.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const EvalReport base_eval = evaluate(base, test);
  std::vector<SweepRow> rows;
  for (int n : sorted) {
    try {
      TrainConfig cfg = tcfg;
      cfg.trainable_layers = n;
      const Checkpoint tuned = customize(base, train, cfg);
      const EvalReport r = evaluate(tuned, test, base_eval);
      rows.push_back({n, base.model.config().n_layers, r.accuracy, *r.improvement_points, *r.improvement_relative});
    } catch (const Error& e) {
      throw Error(e.category(), fmt::format("sweep n={}: {}", n, e.what()));
    }
  }
  return rows;
}

SchemeComparison compare_schemes(const Checkpoint& base, std::span<const CleanComment> comments,
                                 LabelerBackend& backend, const LabeledDataset& test, const TrainConfig& tcfg,
                                 const LabelerPolicy& policy) {
  SchemeComparison out;
  LabelRun run = llm_label(comments, backend, policy);
  out.labeled = std::move(run.dataset);
  out.rejects = run.rejects.size();

  out.generated.split = Split::train;
  const auto counts = out.labeled.class_counts();
  for (SentimentLabel l : kAllLabels) {
    const std::size_t want = counts[static_cast<std::size_t>(code(l))];
    if (want == 0) continue;
    GenerateRun g = llm_generate(l, want, backend, policy, "gen");
    for (auto& e : g.examples) out.generated.examples.push_back(std::move(e));
  }
  if (out.generated.size() != out.labeled.size()) {
    throw ValidationError(fmt::format("compare_schemes: generated set has {} examples but the labeled set has {}",
                                      out.generated.size(), out.labeled.size()));
  }

  const EvalReport base_eval = evaluate(base, test);
  out.rows.push_back({"base", base_eval.accuracy, 0.0, 0.0, 0});
  auto run_scheme = [&](const char* name, const LabeledDataset& train) {
    const Checkpoint tuned = customize(base, train, tcfg);
    const EvalReport r = evaluate(tuned, test, base_eval);
    out.rows.push_back({name, r.accuracy, *r.improvement_points, *r.improvement_relative, train.size()});
  };
  run_scheme("y_to_xhat", out.generated);
  run_scheme("x_to_yhat", out.labeled);
  return out;
}

namespace {

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig t;
  t.epochs = j.value("epochs", t.epochs);
  t.batch_size = j.value("batch_size", t.batch_size);
  t.learning_rate = j.value("learning_rate", t.learning_rate);
  t.trainable_layers = j.value("trainable_layers", t.trainable_layers);
  t.seed = j.value("seed", t.seed);
  t.shuffle = j.value("shuffle", t.shuffle);
  t.allow_short = j.value("allow_short", t.allow_short);
  return t;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view synth_spec_json) {
  ExperimentConfig e;
  try {
    const auto root = nlohmann::json::parse(synth_spec_json);
    if (!root.contains("experiment")) return e;
    const auto& j = root.at("experiment");
    if (j.contains("model")) {
      const auto& m = j.at("model");
      e.model.max_len = m.value("max_len", e.model.max_len);
      e.model.d_model = m.value("d_model", e.model.d_model);
      e.model.n_heads = m.value("n_heads", e.model.n_heads);
      e.model.n_layers = m.value("n_layers", e.model.n_layers);
      e.model.d_ff = m.value("d_ff", e.model.d_ff);
      e.model.dropout_rate = m.value("dropout_rate", e.model.dropout_rate);
      e.model.seed = m.value("seed", e.model.seed);
    }
    if (j.contains("vocab")) {
      e.vocab_min_freq = j.at("vocab").value("min_freq", e.vocab_min_freq);
      e.vocab_max_size = j.at("vocab").value("max_size", e.vocab_max_size);
    }
    if (j.contains("pretrain")) e.pretrain = train_config_from_json(j.at("pretrain"));
    if (j.contains("customize")) e.customize = train_config_from_json(j.at("customize"));
    e.sweep_layers = j.value("sweep_layers", std::vector<int>{});
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(fmt::format("experiment config: {}", ex.what()));
  }
  e.pretrain.validate();
  e.customize.validate();
  return e;
}

const ExperimentConfig& builtin_experiment_config() {
  static const ExperimentConfig config = parse_experiment_config(embedded::synth_spec_v1());
  return config;
}

Vocabulary build_vocab(std::span<const LabeledDataset* const> datasets, int min_freq, std::size_t max_size) {
  std::vector<std::string> texts;
  for (const LabeledDataset* d : datasets) {
    for (const LabeledExample& e : d->examples) texts.push_back(e.comment.text);
  }
  return build_vocab(std::span<const std::string>(texts), min_freq, max_size);
}

}  // namespace alrn
