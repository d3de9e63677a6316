#include "dkg/graph.hpp"

#include "dkg/error.hpp"

namespace dkg {
namespace {

SpecialLocations create_specials(ParamSet& params, std::size_t d, Rng& rng) {
  return {params.add_uniform("graph.nowhere", {1, d}, rng),
          params.add_uniform("graph.somewhere", {1, d}, rng)};
}

SpecialLocations bind_specials(const ParamSet& params) {
  return {params.get("graph.nowhere"), params.get("graph.somewhere")};
}

Tensor repeat_rows(const Tensor& row, std::size_t n) {
  return add(Tensor::zeros({n, row.cols()}), row);
}

}  // namespace

Tensor identity_matrix(std::size_t n) {
  Tensor eye = Tensor::zeros({n, n});
  auto v = eye.mutable_values();
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  return eye;
}

GraphParams GraphParams::create(ParamSet& params, const GraphConfig& cfg, Rng& rng) {
  GraphParams p;
  if (cfg.coref_across) p.gate = Linear::create(params, "graph.gate", 2 * cfg.node_dim, 1, rng);
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    p.layers.push_back(LstmParams::create(params, "graph.update" + std::to_string(l),
                                          2 * cfg.node_dim, cfg.node_dim, rng));
  }
  p.specials = create_specials(params, cfg.node_dim, rng);
  return p;
}

GraphParams GraphParams::bind(const ParamSet& params, const GraphConfig& cfg) {
  GraphParams p;
  if (cfg.coref_across) p.gate = Linear::bind(params, "graph.gate");
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    p.layers.push_back(LstmParams::bind(params, "graph.update" + std::to_string(l)));
  }
  p.specials = bind_specials(params);
  return p;
}

GraphState init_graph(const Tensor& initial_entities, const GraphParams& params,
                      const GraphConfig& cfg) {
  const std::size_t n = initial_entities.rows();
  if (initial_entities.cols() != cfg.node_dim) {
    throw ShapeError("init_graph: entity vectors " + to_string(initial_entities.shape()) +
                     " do not have width " + std::to_string(cfg.node_dim));
  }
  GraphState g;
  g.step = 0;
  g.entities = initial_entities;
  g.locations = repeat_rows(params.specials.somewhere, n);
  g.coref = identity_matrix(n);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    g.carries.push_back(LstmState::zeros(n, cfg.node_dim));
  }
  return g;
}

CorefAcrossResult coref_across(const Tensor& incoming, const Tensor& previous_locations,
                               const Linear& gate) {
  if (incoming.cols() != previous_locations.cols() || incoming.rows() != previous_locations.rows()) {
    throw ShapeError("coref_across: incoming " + to_string(incoming.shape()) +
                     " does not match location nodes " + to_string(previous_locations.shape()));
  }
  CorefAcrossResult r;
  r.attention = softmax_rows(matmul(incoming, transpose(previous_locations)));
  Tensor attended = matmul(r.attention, previous_locations);
  r.gate = sigmoid(gate(concat_cols({attended, incoming})));
  // g * psi + (1 - g) * psi'
  r.locations = add(mul(r.gate, incoming), mul(add_scalar(scale(r.gate, -1.0), 1.0), attended));
  return r;
}

CorefWithinResult coref_within(const Tensor& candidates) {
  CorefWithinResult r;
  r.adjacency = softmax_rows(matmul(candidates, transpose(candidates)));
  r.locations = matmul(r.adjacency, candidates);
  return r;
}

UpdateLayerResult update_layer(const Tensor& entities, const Tensor& locations,
                               const LstmState& carry, const Tensor& adjacency,
                               const LstmParams& cell, const GraphConfig& cfg,
                               const ForwardContext& ctx) {
  Tensor input = ctx.drop(concat_cols({entities, locations}), cfg.rnn_dropout);
  UpdateLayerResult r;
  r.carry = lstm_cell(input, carry, cell);
  r.entities = add(entities, r.carry.h);
  Tensor residual = add(locations, r.carry.h);
  r.locations = matmul(adjacency, residual);
  return r;
}

GraphState graph_step(const GraphState& previous, const Tensor& incoming, const GraphParams& params,
                      const GraphConfig& cfg, const ForwardContext& ctx, GraphStepTrace* trace) {
  const std::size_t n = previous.size();
  if (incoming.rows() != n || incoming.cols() != cfg.node_dim) {
    throw ShapeError("graph_step: incoming " + to_string(incoming.shape()) + " for " +
                     std::to_string(n) + " entities of width " + std::to_string(cfg.node_dim));
  }
  Tensor gated = incoming;
  if (cfg.coref_across) {
    auto across = coref_across(incoming, previous.locations, params.gate);
    gated = across.locations;
    if (trace) {
      trace->attention = across.attention;
      trace->gate = across.gate;
    }
  }
  Tensor locations = gated;
  Tensor adjacency;
  if (cfg.coref_within) {
    auto within = coref_within(gated);
    locations = within.locations;
    adjacency = within.adjacency;
  } else {
    adjacency = identity_matrix(n);
  }
  if (trace) trace->adjacency = adjacency;

  GraphState next;
  next.step = previous.step + 1;
  next.coref = adjacency;
  Tensor entities = previous.entities;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto out = update_layer(entities, locations, previous.carries.at(l), adjacency,
                            params.layers[l], cfg, ctx);
    entities = out.entities;
    locations = out.locations;
    next.carries.push_back(out.carry);
  }
  next.entities = entities;
  next.locations = locations;
  return next;
}

LstmUnitParams LstmUnitParams::create(ParamSet& params, const GraphConfig& cfg, Rng& rng) {
  LstmUnitParams p;
  p.cell = LstmParams::create(params, "graph.lstm_unit", cfg.node_dim, cfg.node_dim, rng);
  p.specials = create_specials(params, cfg.node_dim, rng);
  return p;
}

LstmUnitParams LstmUnitParams::bind(const ParamSet& params) {
  return {LstmParams::bind(params, "graph.lstm_unit"), bind_specials(params)};
}

GraphState lstm_unit_step(const GraphState& previous, const Tensor& incoming,
                          const LstmUnitParams& params, const GraphConfig& cfg,
                          const ForwardContext& ctx) {
  GraphState next;
  next.step = previous.step + 1;
  const LstmState carry = previous.carries.empty()
                              ? LstmState::zeros(previous.size(), cfg.node_dim)
                              : previous.carries.front();
  LstmState out = lstm_cell(ctx.drop(incoming, cfg.rnn_dropout), carry, params.cell);
  next.entities = out.h;
  next.locations = incoming;
  next.coref = identity_matrix(previous.size());
  next.carries.push_back(out);
  return next;
}

}  // namespace dkg
