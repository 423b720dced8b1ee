#include "alrn/adam.hpp"

#include <cmath>

#include <fmt/format.h>

#include "alrn/error.hpp"

namespace alrn {

const Tensor* AdamState::first_moment(const std::string& name) const {
  auto it = m_.find(name);
  return it == m_.end() ? nullptr : &it->second;
}

const Tensor* AdamState::second_moment(const std::string& name) const {
  auto it = v_.find(name);
  return it == v_.end() ? nullptr : &it->second;
}

void adam_step(AdamState& state, const std::vector<std::pair<std::string, Tensor*>>& params,
               const Gradients& grads) {
  for (const auto& [name, p] : params) {
    auto it = grads.find(name);
    if (it == grads.end()) throw ValidationError(fmt::format("adam_step: no gradient for '{}'", name));
    if (it->second.shape() != p->shape()) {
      throw ShapeError(fmt::format("adam_step: '{}' has shape {} but gradient {}", name, shape_string(p->shape()),
                                   shape_string(it->second.shape())));
    }
    if (auto m = state.m_.find(name); m != state.m_.end() && m->second.shape() != p->shape()) {
      throw ShapeError(fmt::format("adam_step: moment shape for '{}' changed", name));
    }
  }

  const auto& h = state.hyper_;
  ++state.step_;
  const double t = static_cast<double>(state.step_);
  const double c1 = 1.0 - std::pow(h.beta1, t);
  const double c2 = 1.0 - std::pow(h.beta2, t);
  for (const auto& [name, p] : params) {
    const Tensor& g = grads.at(name);
    Tensor& m = state.m_.try_emplace(name, p->shape(), 0.0).first->second;
    Tensor& v = state.v_.try_emplace(name, p->shape(), 0.0).first->second;
    for (std::size_t i = 0; i < p->size(); ++i) {
      m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
      v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      (*p)[i] -= h.learning_rate * mhat / (std::sqrt(vhat) + h.epsilon);
    }
  }
}

}  // namespace alrn
