#include "alrn/model.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "alrn/error.hpp"
#include "alrn/text.hpp"

namespace alrn {

void ModelConfig::validate() const {
  if (vocab_size < 3) throw ConfigError("model: vocab_size must be at least 3 (the special tokens)");
  if (max_len < 2) throw ConfigError("model: max_len must be at least 2");
  if (d_model == 0) throw ConfigError("model: d_model must be positive");
  if (n_heads == 0) throw ConfigError("model: n_heads must be positive");
  if (d_model % n_heads != 0) {
    throw ConfigError(fmt::format("model: d_model ({}) must be divisible by n_heads ({})", d_model, n_heads));
  }
  if (n_layers < 1) throw ConfigError("model: n_layers must be at least 1");
  if (d_ff == 0) throw ConfigError("model: d_ff must be positive");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("model: dropout_rate must be in [0, 1)");
}

Model::Model(const ModelConfig& config) : config_(config) {
  config_.validate();
  const std::size_t d = config.d_model, f = config.d_ff;
  token_embedding = Tensor({config.vocab_size, d});
  position_embedding = Tensor({config.max_len, d});
  layers.resize(config.n_layers);
  for (EncoderLayer& l : layers) {
    l.wq = Tensor({d, d});
    l.wk = Tensor({d, d});
    l.wv = Tensor({d, d});
    l.wo = Tensor({d, d});
    l.bq = Tensor({d});
    l.bk = Tensor({d});
    l.bv = Tensor({d});
    l.bo = Tensor({d});
    l.ln1_gamma = Tensor({d}, 1.0);
    l.ln1_beta = Tensor({d});
    l.ff1_w = Tensor({d, f});
    l.ff1_b = Tensor({f});
    l.ff2_w = Tensor({f, d});
    l.ff2_b = Tensor({d});
    l.ln2_gamma = Tensor({d}, 1.0);
    l.ln2_beta = Tensor({d});
  }
  head_weight = Tensor({d, kNumLabels});
  head_bias = Tensor({kNumLabels});
  partition_.layers.assign(config.n_layers, true);
}

namespace {

template <typename ModelT, typename Ref>
std::vector<Ref> collect(ModelT& m) {
  std::vector<Ref> out;
  out.push_back({"embed.token", &m.token_embedding, ParamGroup::embeddings, 0});
  out.push_back({"embed.position", &m.position_embedding, ParamGroup::embeddings, 0});
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    auto& l = m.layers[i];
    auto add = [&](const char* suffix, auto* t) {
      out.push_back({fmt::format("layers.{}.{}", i, suffix), t, ParamGroup::layer, i});
    };
    add("attn.wq", &l.wq);
    add("attn.bq", &l.bq);
    add("attn.wk", &l.wk);
    add("attn.bk", &l.bk);
    add("attn.wv", &l.wv);
    add("attn.bv", &l.bv);
    add("attn.wo", &l.wo);
    add("attn.bo", &l.bo);
    add("ln1.gamma", &l.ln1_gamma);
    add("ln1.beta", &l.ln1_beta);
    add("ffn.w1", &l.ff1_w);
    add("ffn.b1", &l.ff1_b);
    add("ffn.w2", &l.ff2_w);
    add("ffn.b2", &l.ff2_b);
    add("ln2.gamma", &l.ln2_gamma);
    add("ln2.beta", &l.ln2_beta);
  }
  out.push_back({"head.weight", &m.head_weight, ParamGroup::head, 0});
  out.push_back({"head.bias", &m.head_bias, ParamGroup::head, 0});
  return out;
}

}  // namespace

std::vector<ParamRef> Model::parameters() { return collect<Model, ParamRef>(*this); }
std::vector<ConstParamRef> Model::parameters() const { return collect<const Model, ConstParamRef>(*this); }

void Model::set_trainable(int n) {
  const int total = static_cast<int>(config_.n_layers);
  if (n < 0 || n > total) {
    throw ValidationError(fmt::format("trainable layer count {} outside [0, {}]", n, total));
  }
  for (int i = 0; i < total; ++i) partition_.layers[static_cast<std::size_t>(i)] = i >= total - n;
  partition_.embeddings = n == total;
  partition_.head = n > 0;
}

int Model::trainable_layers() const noexcept {
  return static_cast<int>(std::count(partition_.layers.begin(), partition_.layers.end(), true));
}

bool Model::is_trainable(ParamGroup group, std::size_t layer) const {
  switch (group) {
    case ParamGroup::embeddings: return partition_.embeddings;
    case ParamGroup::head: return partition_.head;
    case ParamGroup::layer: return partition_.layers.at(layer);
  }
  return false;
}

Model init_model(const ModelConfig& config) {
  Model m(config);
  Rng root(config.seed);
  std::uint64_t stream = 0;
  for (ParamRef& p : m.parameters()) {
    Rng rng = root.split(stream++);
    Tensor& t = *p.tensor;
    const bool is_matrix = t.rank() == 2;
    if (p.group == ParamGroup::embeddings) {
      for (double& v : t.values()) v = rng.uniform(-0.1, 0.1);
    } else if (is_matrix) {
      const double a = std::sqrt(6.0 / static_cast<double>(t.shape()[0] + t.shape()[1]));
      for (double& v : t.values()) v = rng.uniform(-a, a);
    }
  }
  return m;
}

Model with_trainable(Model model, int n) {
  model.set_trainable(n);
  return model;
}

namespace {

void check_batch(const Model& model, std::span<const TokenSequence> batch) {
  const auto& cfg = model.config();
  if (batch.empty()) throw ValidationError("forward: empty batch");
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const TokenSequence& s = batch[b];
    if (s.ids.size() != cfg.max_len || s.mask.size() != cfg.max_len) {
      throw ValidationError(fmt::format("forward: sequence {} has length {} but the model expects {}", b,
                                        s.ids.size(), cfg.max_len));
    }
    bool seen_pad = false;
    for (std::size_t i = 0; i < cfg.max_len; ++i) {
      if (s.ids[i] < 0 || static_cast<std::size_t>(s.ids[i]) >= cfg.vocab_size) {
        throw ValidationError(fmt::format("forward: token id {} outside vocabulary of size {}", s.ids[i],
                                          cfg.vocab_size));
      }
      if (s.mask[i] == 0) {
        seen_pad = true;
      } else if (seen_pad || s.mask[i] != 1) {
        throw ValidationError(fmt::format("forward: sequence {} mask is not a prefix of ones", b));
      }
    }
    if (s.mask[0] != 1) throw ValidationError(fmt::format("forward: sequence {} is empty", b));
  }
}

}  // namespace

Var forward(Tape& tape, const Model& model, std::span<const TokenSequence> batch, const ForwardOptions& options) {
  check_batch(model, batch);
  if (options.train_mode && options.dropout_rng == nullptr && model.config().dropout_rate > 0.0) {
    throw ValidationError("forward: train_mode requires a dropout generator");
  }
  const auto& cfg = model.config();
  const std::size_t B = batch.size();
  std::size_t T = 1;
  for (const auto& s : batch) T = std::max(T, s.length());

  // Padding beyond the longest sequence in the batch is never attended to and
  // never read by the head, so it is trimmed before any work is done.
  std::vector<int> ids(B * T), positions(B * T), mask(B * T);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t t = 0; t < T; ++t) {
      ids[b * T + t] = batch[b].ids[t];
      positions[b * T + t] = static_cast<int>(t);
      mask[b * T + t] = batch[b].mask[t];
    }
  }

  auto param = [&](const std::string& name, const Tensor& value, ParamGroup group, std::size_t layer) {
    const bool watched = options.watch == WatchMode::all ||
                         (options.watch == WatchMode::trainable && model.is_trainable(group, layer));
    return watched ? tape.watch(name, value) : tape.constant(value);
  };
  auto drop = [&](Var x) {
    return options.train_mode ? dropout(x, cfg.dropout_rate, *options.dropout_rng) : x;
  };

  std::vector<ConstParamRef> refs = model.parameters();
  std::size_t next = 0;
  auto take = [&]() {
    const ConstParamRef& r = refs[next++];
    return param(r.name, *r.tensor, r.group, r.layer);
  };

  Var tok = take();
  Var pos = take();
  Var x = drop(add(embedding(tok, ids), embedding(pos, positions)));
  AttentionLayout layout{B, T, cfg.n_heads, mask};
  for (std::size_t i = 0; i < cfg.n_layers; ++i) {
    Var wq = take(), bq = take(), wk = take(), bk = take(), wv = take(), bv = take(), wo = take(), bo = take();
    Var g1 = take(), b1 = take();
    Var f1w = take(), f1b = take(), f2w = take(), f2b = take();
    Var g2 = take(), b2 = take();
    Var q = add_bias(matmul(x, wq), bq);
    Var k = add_bias(matmul(x, wk), bk);
    Var v = add_bias(matmul(x, wv), bv);
    Var a = drop(add_bias(matmul(attention(q, k, v, layout), wo), bo));
    x = layer_norm(add(x, a), g1, b1);
    Var h = gelu(add_bias(matmul(x, f1w), f1b));
    Var f = drop(add_bias(matmul(h, f2w), f2b));
    x = layer_norm(add(x, f), g2, b2);
  }
  std::vector<std::size_t> cls_rows(B);
  for (std::size_t b = 0; b < B; ++b) cls_rows[b] = b * T;
  Var cls = gather_rows(x, cls_rows);
  Var hw = take(), hb = take();
  return add_bias(matmul(cls, hw), hb);
}

Tensor forward(const Model& model, std::span<const TokenSequence> batch) {
  Tape tape;
  return forward(tape, model, batch, {}).value();
}

Prediction prediction_from_logits(std::span<const double> logits) {
  if (logits.size() != kNumLabels) throw ShapeError("prediction_from_logits: expected three logits");
  Prediction p;
  kernels::softmax_row(logits, p.probabilities);
  std::size_t best = 0;
  for (std::size_t i = 1; i < kNumLabels; ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  p.label = label_from_code(static_cast<int>(best));
  return p;
}

Prediction predict(const Model& model, const Vocabulary& vocab, std::string_view text) {
  TokenSequence seq = encode(text::clean_text(text), vocab, model.config().max_len);
  Tensor logits = forward(model, std::span<const TokenSequence>(&seq, 1));
  return prediction_from_logits(logits.row(0));
}

}  // namespace alrn
