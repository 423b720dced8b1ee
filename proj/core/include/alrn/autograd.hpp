#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <span>
#include <string>

#include "alrn/rng.hpp"
#include "alrn/tensor.hpp"

namespace alrn {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape
/// lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  Tape* tape() const noexcept { return tape_; }
  std::size_t index() const noexcept { return index_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t index) noexcept : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

using Gradients = std::map<std::string, Tensor>;

/// Records operations for reverse-mode differentiation. Only values that
/// depend on a watched parameter carry gradients; constants (frozen
/// parameters, inputs) never appear in the gradient map. Single-owner: do not
/// share one tape between threads.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape& tape, const Tensor& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  /// A parameter whose gradient backward() reports under `name`.
  Var watch(std::string name, Tensor value);

  /// Reverse sweep from a one-element loss recorded on this tape. Every
  /// watched parameter gets an entry, zero if the loss does not depend on it.
  Gradients backward(Var loss);

  bool requires_grad(Var v) const;
  std::size_t size() const noexcept { return nodes_.size(); }

  // Building blocks for operations.
  Var record(Tensor value, std::initializer_list<Var> parents, BackwardFn backward);
  /// Gradient accumulator for v, allocated on first use; nullptr when v does
  /// not require a gradient.
  Tensor* grad(Var v);
  const Tensor& value(std::size_t index) const { return nodes_[index].value; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    BackwardFn backward;
    std::string name;  // watched parameters only
  };

  void check_owned(Var v, const char* what) const;

  std::deque<Node> nodes_;
};

// Differentiable operations. Shapes follow the value-level functions in
// tensor.hpp; all inputs must live on the same tape.

Var matmul(Var a, Var b);
Var add(Var a, Var b);
/// x [m x n] plus a bias row b [n] broadcast over rows.
Var add_bias(Var x, Var b);
Var mul(Var a, Var b);
Var sum(Var x);
Var gelu(Var x);
Var softmax(Var x);
Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);
Var cross_entropy(Var logits, std::span<const int> labels);
/// Rows of table [V x d] selected by ids -> [n x d].
Var embedding(Var table, std::span<const int> ids);
/// Rows of x selected by index -> [n x cols].
Var gather_rows(Var x, std::span<const std::size_t> rows);
/// Inverted dropout: zeroes each element with probability rate and scales
/// survivors by 1/(1-rate). rate == 0 returns x unchanged.
Var dropout(Var x, double rate, Rng& rng);

struct AttentionLayout {
  std::size_t batch = 0;
  std::size_t seq_len = 0;
  std::size_t heads = 1;
  /// batch * seq_len entries; 0 marks a padding key that no query may attend to.
  std::span<const int> key_mask;
};

/// Multi-head scaled dot-product attention over q, k, v of shape
/// [batch*seq_len x d_model]; heads split d_model into equal slices. Padding
/// keys are excluded from the softmax entirely.
Var attention(Var q, Var k, Var v, const AttentionLayout& layout);

}  // namespace alrn
