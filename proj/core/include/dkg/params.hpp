#pragma once

#include <map>
#include <string>
#include <vector>

#include "dkg/tensor.hpp"

namespace dkg {

// Named, uniquely keyed collection of trainable tensors. Iteration order is
// lexicographic by name, which fixes the order of optimizer updates and of
// checkpoint records.
class ParamSet {
 public:
  using Map = std::map<std::string, Tensor>;

  // Weight initialised uniformly in +-1/sqrt(shape[0]).
  Tensor add_uniform(const std::string& name, Shape shape, Rng& rng);
  Tensor add_zeros(const std::string& name, Shape shape);
  Tensor add_values(const std::string& name, Shape shape, std::vector<Real> values);
  // Registers an existing tensor under `name`.
  Tensor add(const std::string& name, Tensor tensor);

  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.count(name) != 0; }
  bool contains_prefix(const std::string& prefix) const;

  std::vector<std::string> names() const;
  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  void zero_grad();

  // Deep copy of the values; the copies are fresh leaves that require grads.
  ParamSet clone() const;
  // Overwrites values from a set with identical names and shapes.
  void assign(const ParamSet& other);

  Map::const_iterator begin() const { return params_.begin(); }
  Map::const_iterator end() const { return params_.end(); }

 private:
  Map params_;
};

}  // namespace dkg
