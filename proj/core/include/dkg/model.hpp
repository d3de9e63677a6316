#pragma once

// The full reader + graph model over one process, in teacher-forced or free
// running mode, and the configuration switches for its ablated variants.

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dkg/embeddings.hpp"
#include "dkg/encoder.hpp"
#include "dkg/events.hpp"
#include "dkg/graph.hpp"
#include "dkg/params.hpp"
#include "dkg/reader.hpp"

namespace dkg {

struct ModelConfig {
  std::size_t embed_dim = 50;
  std::size_t hidden = 64;
  std::size_t encoder_layers = 2;
  std::size_t node_dim = 64;
  std::size_t graph_layers = 2;
  std::size_t max_span_length = 15;
  Real rnn_dropout = 0.4;
  Real mlp_dropout = 0.3;

  bool no_coref_across = false;
  bool no_coref_within = false;
  bool lstm_graph_unit = false;
  bool mrc_only_prefix = false;
  bool mrc_only_paragraph = false;

  // Throws UsageError on out-of-range values or conflicting ablations.
  void validate() const;
  bool has_graph() const { return !mrc_only_prefix && !mrc_only_paragraph; }
  std::string variant() const;

  EncoderConfig encoder() const;
  ReaderConfig reader() const;
  GraphConfig graph() const;
};

struct CellPrediction {
  LocationState state;
  std::array<Real, kStateClasses> probs{};
};

// Model output for one process: N x (T + 1) cells.
struct PredictionGrid {
  std::string process_id;
  std::size_t steps = 0;
  std::vector<std::vector<CellPrediction>> cells;

  LocationGrid grid() const;
  StateTable table(const ProcessInstance& instance) const;
};

struct EntityStep {
  StatePrediction prediction;
  std::string span_text;  // decoded span, even when the class is not SPAN
  std::vector<Real> question_weights;
};

struct StepTrace {
  std::size_t step = 0;
  std::vector<EntityStep> entities;
  // Graph diagnostics; undefined at step 0 and for variants without them.
  Tensor attention;
  Tensor gate;
  Tensor adjacency;
};

struct ProcessOutput {
  Tensor loss;  // defined only when a loss was requested
  PredictionGrid predictions;
  std::vector<StepTrace> trace;
  // Per step (1..T), the location vectors handed to the graph, N x d.
  std::vector<Tensor> graph_inputs;
};

struct RunOptions {
  bool teacher_forcing = false;
  bool compute_loss = false;
  bool keep_trace = false;
};

class Model {
 public:
  // Fresh parameters drawn from `seed`.
  Model(const ModelConfig& cfg, std::uint64_t seed);
  // Wraps loaded parameters; throws if names or shapes do not fit `cfg`.
  Model(const ModelConfig& cfg, ParamSet params);

  const ModelConfig& config() const { return cfg_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  ProcessOutput run(const ProcessInstance& instance, const EmbeddingTable& table,
                    const RunOptions& options, const ForwardContext& ctx) const;

  PredictionGrid predict(const ProcessInstance& instance, const EmbeddingTable& table) const;

 private:
  void bind();

  ModelConfig cfg_;
  ParamSet params_;
  EncoderParams encoder_;
  ReaderParams reader_;
  std::optional<GraphParams> graph_;
  std::optional<LstmUnitParams> lstm_unit_;
};

// Free-running prediction with dropout off.
PredictionGrid predict_process(const Model& model, const ProcessInstance& instance,
                               const EmbeddingTable& table);

}  // namespace dkg
