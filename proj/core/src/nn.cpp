#include "dkg/nn.hpp"

#include <algorithm>

#include "dkg/error.hpp"

namespace dkg {

Tensor ForwardContext::drop(const Tensor& x, Real rate) const {
  if (!training || rate == 0.0) return x;
  if (rng == nullptr) throw Error("dropout while training requires a random stream");
  return dropout(x, rate, true, *rng);
}

Linear Linear::create(ParamSet& params, const std::string& prefix, std::size_t in,
                      std::size_t out, Rng& rng) {
  Linear l;
  l.weight = params.add_uniform(prefix + ".weight", {in, out}, rng);
  l.bias = params.add_zeros(prefix + ".bias", {1, out});
  return l;
}

Linear Linear::bind(const ParamSet& params, const std::string& prefix) {
  return {params.get(prefix + ".weight"), params.get(prefix + ".bias")};
}

Tensor Linear::operator()(const Tensor& x) const { return add(matmul(x, weight), bias); }

LstmParams LstmParams::create(ParamSet& params, const std::string& prefix,
                              std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
  LstmParams p;
  p.weight = params.add_uniform(prefix + ".weight", {input_dim + hidden_dim, 4 * hidden_dim}, rng);
  std::vector<Real> bias(4 * hidden_dim, 0.0);
  std::fill(bias.begin() + hidden_dim, bias.begin() + 2 * hidden_dim, 1.0);
  p.bias = params.add_values(prefix + ".bias", {1, 4 * hidden_dim}, std::move(bias));
  return p;
}

LstmParams LstmParams::bind(const ParamSet& params, const std::string& prefix) {
  return {params.get(prefix + ".weight"), params.get(prefix + ".bias")};
}

LstmState LstmState::zeros(std::size_t batch, std::size_t hidden) {
  return {Tensor::zeros({batch, hidden}), Tensor::zeros({batch, hidden})};
}

LstmState lstm_cell(const Tensor& x, const LstmState& prev, const LstmParams& params) {
  const std::size_t hid = params.hidden_dim();
  if (x.cols() != params.input_dim() || prev.h.cols() != hid || prev.c.cols() != hid ||
      prev.h.rows() != x.rows() || prev.c.rows() != x.rows()) {
    throw ShapeError("lstm_cell: x " + to_string(x.shape()) + ", h " + to_string(prev.h.shape()) +
                     ", c " + to_string(prev.c.shape()) + " incompatible with input " +
                     std::to_string(params.input_dim()) + ", hidden " + std::to_string(hid));
  }
  Tensor z = add(matmul(concat_cols({x, prev.h}), params.weight), params.bias);
  Tensor in_gate = sigmoid(slice_cols(z, 0, hid));
  Tensor forget = sigmoid(slice_cols(z, hid, 2 * hid));
  Tensor candidate = tanh(slice_cols(z, 2 * hid, 3 * hid));
  Tensor out_gate = sigmoid(slice_cols(z, 3 * hid, 4 * hid));
  Tensor c = add(mul(forget, prev.c), mul(in_gate, candidate));
  Tensor h = mul(out_gate, tanh(c));
  return {std::move(h), std::move(c)};
}

BiLstmParams BiLstmParams::create(ParamSet& params, const std::string& prefix,
                                  std::size_t input_dim, std::size_t hidden_dim,
                                  std::size_t layers, Rng& rng) {
  if (layers == 0) throw Error("bilstm: layer count must be positive");
  BiLstmParams p;
  std::size_t in = input_dim;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string base = prefix + ".l" + std::to_string(l);
    p.layers.push_back({LstmParams::create(params, base + ".fwd", in, hidden_dim, rng),
                        LstmParams::create(params, base + ".bwd", in, hidden_dim, rng)});
    in = 2 * hidden_dim;
  }
  return p;
}

BiLstmParams BiLstmParams::bind(const ParamSet& params, const std::string& prefix,
                                std::size_t layers) {
  BiLstmParams p;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string base = prefix + ".l" + std::to_string(l);
    p.layers.push_back(
        {LstmParams::bind(params, base + ".fwd"), LstmParams::bind(params, base + ".bwd")});
  }
  return p;
}

std::vector<Tensor> bilstm_encode(const std::vector<Tensor>& inputs, const BiLstmParams& params,
                                  Real dropout_rate, const ForwardContext& ctx) {
  if (inputs.empty()) throw Error("bilstm_encode: empty input sequence");
  if (params.layers.empty()) throw Error("bilstm_encode: no layers");
  const std::size_t len = inputs.size();
  const std::size_t batch = inputs[0].rows();

  std::vector<Tensor> current = inputs;
  for (const auto& layer : params.layers) {
    std::vector<Tensor> dropped(len);
    for (std::size_t j = 0; j < len; ++j) {
      dropped[j] = ctx.drop(current[j], dropout_rate);
    }
    const std::size_t hid = layer.forward.hidden_dim();
    std::vector<Tensor> fwd(len), bwd(len);
    LstmState state = LstmState::zeros(batch, hid);
    for (std::size_t j = 0; j < len; ++j) {
      state = lstm_cell(dropped[j], state, layer.forward);
      fwd[j] = state.h;
    }
    state = LstmState::zeros(batch, layer.backward.hidden_dim());
    for (std::size_t j = len; j-- > 0;) {
      state = lstm_cell(dropped[j], state, layer.backward);
      bwd[j] = state.h;
    }
    for (std::size_t j = 0; j < len; ++j) current[j] = concat_cols({fwd[j], bwd[j]});
  }
  return current;
}

}  // namespace dkg
