#pragma once

// Dynamic bipartite entity/location graph.
//
// Each step takes one incoming location vector per entity and
//   1. attends over the previous location nodes and gates between the
//      incoming vector and the attended one (coreference across steps);
//   2. self-attends among the gated vectors, producing a row-stochastic
//      adjacency (coreference within the step);
//   3. runs L residual LSTM update layers over [entity; location], pooling
//      the location nodes with that adjacency after each layer.

#include <vector>

#include "dkg/nn.hpp"
#include "dkg/reader.hpp"

namespace dkg {

struct GraphConfig {
  std::size_t node_dim = 64;
  std::size_t layers = 2;
  Real rnn_dropout = 0.4;
  bool coref_across = true;
  bool coref_within = true;
};

struct GraphParams {
  Linear gate;  // [psi'; psi] -> 1, empty without coref_across
  std::vector<LstmParams> layers;
  SpecialLocations specials;

  static GraphParams create(ParamSet& params, const GraphConfig& cfg, Rng& rng);
  static GraphParams bind(const ParamSet& params, const GraphConfig& cfg);
};

struct GraphState {
  std::size_t step = 0;
  Tensor entities;   // N x d
  Tensor locations;  // N x d
  Tensor coref;      // N x N, rows sum to one
  std::vector<LstmState> carries;  // one per update layer, N x d each

  std::size_t size() const { return entities.rows(); }
};

// Entity nodes start at the given vectors (N x d), location nodes at the
// learned somewhere vector, adjacency at identity, carries at zero.
GraphState init_graph(const Tensor& initial_entities, const GraphParams& params,
                      const GraphConfig& cfg);

struct CorefAcrossResult {
  Tensor locations;  // N x d gated vectors
  Tensor attention;  // N x N, row i attends over previous location nodes
  Tensor gate;       // N x 1
};

CorefAcrossResult coref_across(const Tensor& incoming, const Tensor& previous_locations,
                               const Linear& gate);

struct CorefWithinResult {
  Tensor locations;
  Tensor adjacency;
};

CorefWithinResult coref_within(const Tensor& candidates);

struct UpdateLayerResult {
  Tensor entities;
  Tensor locations;
  LstmState carry;
};

UpdateLayerResult update_layer(const Tensor& entities, const Tensor& locations,
                               const LstmState& carry, const Tensor& adjacency,
                               const LstmParams& cell, const GraphConfig& cfg,
                               const ForwardContext& ctx);

struct GraphStepTrace {
  Tensor attention;
  Tensor gate;
  Tensor adjacency;
};

GraphState graph_step(const GraphState& previous, const Tensor& incoming, const GraphParams& params,
                      const GraphConfig& cfg, const ForwardContext& ctx,
                      GraphStepTrace* trace = nullptr);

// Ablation: a plain per-entity LSTM over the incoming vectors whose hidden
// state serves as the entity node. No coreference, no location propagation.
struct LstmUnitParams {
  LstmParams cell;
  SpecialLocations specials;

  static LstmUnitParams create(ParamSet& params, const GraphConfig& cfg, Rng& rng);
  static LstmUnitParams bind(const ParamSet& params);
};

GraphState lstm_unit_step(const GraphState& previous, const Tensor& incoming,
                          const LstmUnitParams& params, const GraphConfig& cfg,
                          const ForwardContext& ctx);

Tensor identity_matrix(std::size_t n);

}  // namespace dkg
