#include "dkg/params.hpp"

#include <cmath>

#include "dkg/error.hpp"

namespace dkg {

Tensor ParamSet::add(const std::string& name, Tensor tensor) {
  if (name.empty()) throw Error("parameter name must be nonempty");
  if (!tensor.defined()) throw Error("parameter '" + name + "' is undefined");
  tensor.set_requires_grad(true);
  auto [it, inserted] = params_.emplace(name, std::move(tensor));
  if (!inserted) throw Error("duplicate parameter name '" + name + "'");
  return it->second;
}

Tensor ParamSet::add_uniform(const std::string& name, Shape shape, Rng& rng) {
  Tensor t = Tensor::zeros(shape);
  const Real bound = 1.0 / std::sqrt(static_cast<Real>(shape[0]));
  std::uniform_real_distribution<Real> dist(-bound, bound);
  for (auto& v : t.mutable_values()) v = dist(rng);
  return add(name, std::move(t));
}

Tensor ParamSet::add_zeros(const std::string& name, Shape shape) {
  return add(name, Tensor::zeros(std::move(shape)));
}

Tensor ParamSet::add_values(const std::string& name, Shape shape, std::vector<Real> values) {
  return add(name, Tensor::from_values(std::move(shape), std::move(values)));
}

const Tensor& ParamSet::get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error("unknown parameter '" + name + "'");
  return it->second;
}

bool ParamSet::contains_prefix(const std::string& prefix) const {
  auto it = params_.lower_bound(prefix);
  return it != params_.end() && it->first.compare(0, prefix.size(), prefix) == 0;
}

std::vector<std::string> ParamSet::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, _] : params_) out.push_back(name);
  return out;
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : params_) n += t.size();
  return n;
}

void ParamSet::zero_grad() {
  for (auto& [_, t] : params_) {
    Tensor handle = t;
    handle.zero_grad();
  }
}

ParamSet ParamSet::clone() const {
  ParamSet out;
  for (const auto& [name, t] : params_) out.add(name, t.detach());
  return out;
}

void ParamSet::assign(const ParamSet& other) {
  if (other.size() != size()) throw Error("parameter sets differ in size");
  for (auto& [name, t] : params_) {
    const Tensor& src = other.get(name);
    if (src.shape() != t.shape()) {
      throw ShapeError("parameter '" + name + "' shape " + to_string(t.shape()) +
                       " differs from " + to_string(src.shape()));
    }
    Tensor handle = t;
    auto dst = handle.mutable_values();
    auto values = src.values();
    std::copy(values.begin(), values.end(), dst.begin());
  }
}

}  // namespace dkg
