#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alrn/autograd.hpp"
#include "alrn/rng.hpp"
#include "alrn/sentiment.hpp"
#include "alrn/tensor.hpp"
#include "alrn/tokenizer.hpp"

namespace alrn {

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t max_len = kDefaultMaxLen;
  std::size_t d_model = 64;
  std::size_t n_heads = 4;
  std::size_t n_layers = 4;
  std::size_t d_ff = 128;
  double dropout_rate = 0.1;
  std::uint64_t seed = 1;

  /// Throws ConfigError naming the first violated constraint.
  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Post-norm encoder layer: x = LN(x + Attn(x)); x = LN(x + FFN(x)).
struct EncoderLayer {
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;
  Tensor ln1_gamma, ln1_beta;
  Tensor ff1_w, ff1_b, ff2_w, ff2_b;
  Tensor ln2_gamma, ln2_beta;
};

/// Which parameter groups customisation may update.
struct Partition {
  std::vector<bool> layers;  // one flag per encoder layer, input side first
  bool embeddings = true;
  bool head = true;

  friend bool operator==(const Partition&, const Partition&) = default;
};

enum class ParamGroup { embeddings, layer, head };

struct ParamRef {
  std::string name;
  Tensor* tensor;
  ParamGroup group;
  std::size_t layer;  // meaningful for ParamGroup::layer
};

struct ConstParamRef {
  std::string name;
  const Tensor* tensor;
  ParamGroup group;
  std::size_t layer;
};

class Model {
 public:
  /// Zero-filled parameters with the shapes implied by config; every group
  /// trainable. Use init_model() for a usable starting point.
  explicit Model(const ModelConfig& config);

  const ModelConfig& config() const noexcept { return config_; }

  Tensor token_embedding;     // [vocab x d_model]
  Tensor position_embedding;  // [max_len x d_model]
  std::vector<EncoderLayer> layers;
  Tensor head_weight;  // [d_model x 3]
  Tensor head_bias;    // [3]

  /// Parameters in a fixed order with stable names.
  std::vector<ParamRef> parameters();
  std::vector<ConstParamRef> parameters() const;

  const Partition& partition() const noexcept { return partition_; }
  /// Makes the n encoder layers nearest the output trainable and freezes the
  /// rest. Embeddings are trainable only when n equals the layer count and the
  /// head only when n > 0, so n = 0 leaves nothing to optimise. Throws
  /// ValidationError unless 0 <= n <= n_layers.
  void set_trainable(int n);
  int trainable_layers() const noexcept;
  bool is_trainable(ParamGroup group, std::size_t layer) const;

 private:
  ModelConfig config_;
  Partition partition_;
};

/// Deterministic from config.seed: Xavier-uniform weight matrices, uniform
/// +-0.1 embeddings, zero biases, unit layer-norm gains. All groups trainable.
Model init_model(const ModelConfig& config);

/// Free-function form of Model::set_trainable.
Model with_trainable(Model model, int n);

enum class WatchMode {
  none,       // nothing differentiable (inference)
  trainable,  // parameters in the trainable partition
  all,        // every parameter, for gradient checks
};

struct ForwardOptions {
  bool train_mode = false;      // enables dropout; requires dropout_rng
  Rng* dropout_rng = nullptr;
  WatchMode watch = WatchMode::none;
};

/// Records the forward pass on tape and returns logits [batch x 3]. The
/// [CLS] position feeds the head and padding keys are masked out of
/// attention. Sequences must have the model's max_len and ids inside its
/// vocabulary (ValidationError otherwise).
Var forward(Tape& tape, const Model& model, std::span<const TokenSequence> batch,
            const ForwardOptions& options = {});

/// Inference convenience: logits with dropout off.
Tensor forward(const Model& model, std::span<const TokenSequence> batch);

struct Prediction {
  SentimentLabel label = SentimentLabel::positive;
  std::array<double, kNumLabels> probabilities{};
};

/// Softmax of three logits; the label is the lowest index among the maxima.
Prediction prediction_from_logits(std::span<const double> logits);

/// Cleans the raw text, encodes it with the model's max_len and predicts.
Prediction predict(const Model& model, const Vocabulary& vocab, std::string_view text);

}  // namespace alrn
