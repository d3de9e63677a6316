#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dkg/params.hpp"

namespace dkg {

struct AdamState {
  Real learning_rate = 0.002;
  Real beta1 = 0.9;
  Real beta2 = 0.999;
  Real epsilon = 1e-8;
  std::uint64_t step = 0;
  std::map<std::string, std::vector<Real>> first_moment;
  std::map<std::string, std::vector<Real>> second_moment;
};

// Bias-corrected Adam update of every parameter, then clears gradients.
// Throws if a parameter has no gradient buffer.
void adam_step(ParamSet& params, AdamState& state);

}  // namespace dkg
