#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace alrn {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_size(const Shape& shape) noexcept;

/// Dense row-major tensor of doubles. Operations treat the last axis as
/// columns and every leading axis as rows.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double v) { return Tensor({1}, std::vector<double>{v}); }
  static Tensor vector(std::initializer_list<double> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t cols() const noexcept { return shape_.empty() ? 1 : shape_.back(); }
  std::size_t rows() const noexcept { return cols() == 0 ? 0 : size() / cols(); }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols(), cols()}; }
  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols(), cols()}; }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }
  double& at(std::size_t r, std::size_t c) noexcept { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const noexcept { return data_[r * cols() + c]; }

  /// The single value of a one-element tensor.
  double item() const;

  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Same shape and identical bit patterns.
bool bit_equal(const Tensor& a, const Tensor& b) noexcept;

// Value-level operations; none modifies its inputs.

/// [m x k] x [k x n]. Throws ShapeError naming both shapes.
Tensor matmul(const Tensor& a, const Tensor& b);

/// Softmax over the last axis with max subtraction.
Tensor softmax(const Tensor& x);

/// Per-row standardisation with population variance, then gamma * x + beta.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

/// gelu(x) = 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3))).
double gelu(double x) noexcept;
double gelu_derivative(double x) noexcept;
Tensor gelu(const Tensor& x);

/// Mean over the batch of -log softmax(logits)[label]. Throws
/// ValidationError for an empty batch or out-of-range labels.
double cross_entropy(const Tensor& logits, std::span<const int> labels);

namespace kernels {

/// C (m x n) = op(A) * op(B) (+ C when accumulate). A is m x k (k x m when
/// transposed), B is k x n (n x k when transposed). Row-major.
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const double* a,
          const double* b, double* c, bool accumulate) noexcept;

void softmax_row(std::span<const double> in, std::span<double> out) noexcept;

}  // namespace kernels

}  // namespace alrn
