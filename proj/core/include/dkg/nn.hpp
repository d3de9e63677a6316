#pragma once

// Recurrent and affine building blocks on top of the tensor engine.

#include <string>
#include <vector>

#include "dkg/params.hpp"
#include "dkg/tensor.hpp"

namespace dkg {

// Training flag plus the dropout mask stream for one forward pass.
struct ForwardContext {
  bool training = false;
  Rng* rng = nullptr;

  Tensor drop(const Tensor& x, Real rate) const;
};

// y = x W + b, with W stored input-major (in x out) and b as 1 x out.
struct Linear {
  Tensor weight;
  Tensor bias;

  static Linear create(ParamSet& params, const std::string& prefix, std::size_t in,
                       std::size_t out, Rng& rng);
  static Linear bind(const ParamSet& params, const std::string& prefix);
  Tensor operator()(const Tensor& x) const;
  std::size_t in_dim() const { return weight.rows(); }
  std::size_t out_dim() const { return weight.cols(); }
};

// Gates are laid out [input | forget | candidate | output] along the columns
// of `weight` ((input + hidden) x 4*hidden). The forget bias starts at 1.
struct LstmParams {
  Tensor weight;
  Tensor bias;

  static LstmParams create(ParamSet& params, const std::string& prefix, std::size_t input_dim,
                           std::size_t hidden_dim, Rng& rng);
  static LstmParams bind(const ParamSet& params, const std::string& prefix);
  std::size_t hidden_dim() const { return bias.cols() / 4; }
  std::size_t input_dim() const { return weight.rows() - hidden_dim(); }
};

struct LstmState {
  Tensor h;
  Tensor c;

  static LstmState zeros(std::size_t batch, std::size_t hidden);
};

// One step of a batched LSTM. x is B x input, state tensors are B x hidden.
LstmState lstm_cell(const Tensor& x, const LstmState& prev, const LstmParams& params);

struct BiLstmLayer {
  LstmParams forward;
  LstmParams backward;
};

struct BiLstmParams {
  std::vector<BiLstmLayer> layers;

  static BiLstmParams create(ParamSet& params, const std::string& prefix, std::size_t input_dim,
                             std::size_t hidden_dim, std::size_t layers, Rng& rng);
  static BiLstmParams bind(const ParamSet& params, const std::string& prefix,
                           std::size_t layers);
  std::size_t output_dim() const { return 2 * layers.back().forward.hidden_dim(); }
};

// Runs a stacked bidirectional LSTM over a batch of equal-length sequences.
// inputs[j] is B x input_dim for position j; the result has one B x 2*hidden
// tensor per position, forward state first. Dropout at rate `dropout` is
// applied to each layer's inputs while training.
std::vector<Tensor> bilstm_encode(const std::vector<Tensor>& inputs, const BiLstmParams& params,
                                  Real dropout, const ForwardContext& ctx);

}  // namespace dkg
