#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "alrn/autograd.hpp"
#include "alrn/tensor.hpp"

namespace alrn {

struct AdamHyperparameters {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment estimates keyed by parameter name.
class AdamState {
 public:
  explicit AdamState(AdamHyperparameters hyper = {}) : hyper_(hyper) {}

  const AdamHyperparameters& hyperparameters() const noexcept { return hyper_; }
  std::int64_t step() const noexcept { return step_; }
  const Tensor* first_moment(const std::string& name) const;
  const Tensor* second_moment(const std::string& name) const;

 private:
  friend void adam_step(AdamState&, const std::vector<std::pair<std::string, Tensor*>>&, const Gradients&);

  AdamHyperparameters hyper_;
  std::int64_t step_ = 0;
  std::map<std::string, Tensor> m_;
  std::map<std::string, Tensor> v_;
};

/// One bias-corrected Adam update of every listed parameter, in place. Each
/// parameter needs a gradient of identical shape; throws ShapeError or
/// ValidationError otherwise, leaving parameters and state untouched.
void adam_step(AdamState& state, const std::vector<std::pair<std::string, Tensor*>>& params,
               const Gradients& grads);

}  // namespace alrn
