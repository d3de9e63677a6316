#include "dkg/adam.hpp"

#include <cmath>

#include "dkg/error.hpp"

namespace dkg {

void adam_step(ParamSet& params, AdamState& state) {
  for (const auto& [name, t] : params) {
    if (!t.has_grad()) throw Error("adam_step: parameter '" + name + "' has no gradient");
  }
  ++state.step;
  const Real correction1 = 1.0 - std::pow(state.beta1, static_cast<Real>(state.step));
  const Real correction2 = 1.0 - std::pow(state.beta2, static_cast<Real>(state.step));

  for (const auto& [name, t] : params) {
    Tensor p = t;
    auto& m = state.first_moment[name];
    auto& v = state.second_moment[name];
    if (m.size() != p.size()) m.assign(p.size(), 0.0);
    if (v.size() != p.size()) v.assign(p.size(), 0.0);
    auto values = p.mutable_values();
    auto grad = p.grad();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const Real g = grad[i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
      const Real m_hat = m[i] / correction1;
      const Real v_hat = v[i] / correction2;
      values[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
    p.clear_grad();
  }
}

}  // namespace dkg
