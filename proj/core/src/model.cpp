#include "dkg/model.hpp"

#include <cmath>

#include "dkg/error.hpp"

namespace dkg {

void ModelConfig::validate() const {
  if (embed_dim == 0 || hidden == 0 || encoder_layers == 0 || node_dim == 0 || graph_layers == 0 ||
      max_span_length == 0) {
    throw UsageError("model sizes must be positive");
  }
  if (node_dim % 2 != 0) throw UsageError("node width must be even");
  for (Real p : {rnn_dropout, mlp_dropout}) {
    if (!(p >= 0.0 && p < 1.0)) throw UsageError("dropout rates must lie in [0, 1)");
  }
  const int mrc_only = int(mrc_only_prefix) + int(mrc_only_paragraph);
  if (mrc_only > 1) throw UsageError("--mrc-only-prefix and --mrc-only-paragraph are exclusive");
  if (mrc_only == 1 && (no_coref_across || no_coref_within || lstm_graph_unit)) {
    throw UsageError("reader-only variants have no graph; drop the graph ablation flags");
  }
  if (lstm_graph_unit && (no_coref_across || no_coref_within)) {
    throw UsageError("--lstm-graph-unit has no coreference to disable");
  }
}

std::string ModelConfig::variant() const {
  if (mrc_only_prefix) return "mrc_only_prefix";
  if (mrc_only_paragraph) return "mrc_only_paragraph";
  if (lstm_graph_unit) return "lstm_graph_unit";
  if (no_coref_across && no_coref_within) return "no_coref_across+no_coref_within";
  if (no_coref_across) return "no_coref_across";
  if (no_coref_within) return "no_coref_within";
  return "full";
}

EncoderConfig ModelConfig::encoder() const {
  return {embed_dim, hidden, encoder_layers, node_dim, rnn_dropout};
}

ReaderConfig ModelConfig::reader() const {
  return {embed_dim, 2 * hidden, node_dim, max_span_length, mlp_dropout, rnn_dropout};
}

GraphConfig ModelConfig::graph() const {
  return {node_dim, graph_layers, rnn_dropout, !no_coref_across, !no_coref_within};
}

LocationGrid PredictionGrid::grid() const {
  LocationGrid g(cells.size(), steps);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t t = 0; t < steps; ++t) g.at(i, t) = cells[i][t].state;
  }
  return g;
}

StateTable PredictionGrid::table(const ProcessInstance& instance) const {
  if (instance.id != process_id) {
    throw ValidationError("prediction for '" + process_id + "' paired with '" + instance.id + "'");
  }
  return state_table(instance, grid());
}

Model::Model(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(seed);
  EncoderParams::create(params_, cfg_.encoder(), rng);
  ReaderParams::create(params_, cfg_.reader(), rng);
  if (cfg_.lstm_graph_unit) {
    LstmUnitParams::create(params_, cfg_.graph(), rng);
  } else if (cfg_.has_graph()) {
    GraphParams::create(params_, cfg_.graph(), rng);
  }
  bind();
}

Model::Model(const ModelConfig& cfg, ParamSet params) : cfg_(cfg), params_(std::move(params)) {
  cfg_.validate();
  const Model reference(cfg_, 0);
  for (const auto& [name, t] : reference.params()) {
    if (!params_.contains(name)) throw Error("checkpoint lacks parameter '" + name + "'");
    if (params_.get(name).shape() != t.shape()) {
      throw ShapeError("checkpoint parameter '" + name + "' has shape " +
                       to_string(params_.get(name).shape()) + ", expected " + to_string(t.shape()));
    }
  }
  if (params_.size() != reference.params().size()) {
    for (const auto& name : params_.names()) {
      if (!reference.params().contains(name)) {
        throw Error("checkpoint has parameter '" + name + "' unknown to variant " + cfg_.variant());
      }
    }
  }
  bind();
}

void Model::bind() {
  encoder_ = EncoderParams::bind(params_, cfg_.encoder());
  reader_ = ReaderParams::bind(params_);
  if (cfg_.lstm_graph_unit) {
    lstm_unit_ = LstmUnitParams::bind(params_);
  } else if (cfg_.has_graph()) {
    graph_ = GraphParams::bind(params_, cfg_.graph());
  }
}

ProcessOutput Model::run(const ProcessInstance& inst, const EmbeddingTable& table,
                         const RunOptions& opt, const ForwardContext& ctx) const {
  const std::size_t n = inst.num_entities();
  const std::size_t steps = inst.num_sentences();
  if (table.dim() != cfg_.embed_dim) {
    throw ShapeError("embedding width " + std::to_string(table.dim()) + " does not match model width " +
                     std::to_string(cfg_.embed_dim));
  }
  const bool use_gold = opt.teacher_forcing || opt.compute_loss;
  if (use_gold && (inst.gold.entities() != n || inst.gold.steps() != steps + 1)) {
    throw ValidationError("instance '" + inst.id + "' has no gold grid to train on");
  }
  const EncoderConfig ecfg = cfg_.encoder();
  const ReaderConfig rcfg = cfg_.reader();
  const GraphConfig gcfg = cfg_.graph();

  SpecialLocations specials;
  if (graph_) specials = graph_->specials;
  if (lstm_unit_) specials = lstm_unit_->specials;

  std::vector<std::vector<std::string>> questions;
  for (const auto& e : inst.entities) questions.push_back(make_question(e.name));
  const PassageFeatures features = PassageFeatures::build(inst, table, questions);
  std::vector<QuestionEncoding> q;
  for (const auto& words : questions) q.push_back(encode_question(words, table, reader_, rcfg, ctx));

  ProcessOutput out;
  out.predictions.process_id = inst.id;
  out.predictions.steps = steps + 1;
  out.predictions.cells.assign(n, std::vector<CellPrediction>(steps + 1));
  std::vector<Tensor> log_likelihood;

  // Reads every entity against one encoding and records predictions and
  // loss terms for column t. Returns the location vectors for the graph.
  auto read_step = [&](const ContextEncoding& enc, std::size_t t,
                       const std::vector<Tensor>& nodes) -> std::vector<Tensor> {
    std::vector<Tensor> psi;
    StepTrace trace;
    trace.step = t;
    for (std::size_t i = 0; i < n; ++i) {
      const Tensor tokens = enc.token_matrix(i);
      ReadResult r = read(tokens, q[i], nodes[i], reader_, encoder_.span_proj, specials, rcfg, ctx);
      auto& cell = out.predictions.cells[i][t];
      cell.probs = r.prediction.probs;
      cell.state = r.prediction.kind == LocationKind::kSpan
                       ? LocationState::at(r.prediction.span.start, r.prediction.span.end)
                       : LocationState{r.prediction.kind, {}};
      if (use_gold) {
        const LocationState& gold = inst.gold.at(i, t);
        const bool span_visible = gold.is_span() && gold.span.end < tokens.rows();
        if (opt.compute_loss) {
          log_likelihood.push_back(pick(r.class_log_probs, 0, static_cast<std::size_t>(gold.kind)));
          if (span_visible) {
            log_likelihood.push_back(pick(r.scores.start_log_probs, 0, gold.span.start));
            log_likelihood.push_back(pick(r.scores.end_log_probs, 0, gold.span.end));
          }
        }
        if (opt.teacher_forcing && specials.nowhere.defined()) {
          if (span_visible) {
            psi.push_back(span_projection(tokens, gold.span, encoder_.span_proj));
          } else {
            psi.push_back(gold.exists() ? specials.somewhere : specials.nowhere);
          }
        }
      }
      if (!opt.teacher_forcing) psi.push_back(r.psi);
      if (opt.keep_trace) {
        EntityStep es;
        es.prediction = r.prediction;
        es.span_text = inst.span_text(r.prediction.span);
        const auto w = q[i].weights.values();
        es.question_weights.assign(w.begin(), w.end());
        trace.entities.push_back(std::move(es));
      }
    }
    if (opt.keep_trace) out.trace.push_back(std::move(trace));
    return psi;
  };

  // Column 0: sentence 1 under the initial-pass marker, entity nodes at nu.
  const ContextEncoding initial = encode_initial(features, encoder_, ecfg, ctx);
  std::vector<Tensor> nu;
  for (std::size_t i = 0; i < n; ++i) {
    auto init = entity_init(initial.token_matrix(i), inst.entities[i].mentions, encoder_.span_proj);
    nu.push_back(init ? *init : entity_fallback(inst.entities[i], table, encoder_.fallback));
  }
  read_step(initial, 0, nu);

  GraphState state;
  if (graph_) {
    state = init_graph(concat_rows(nu), *graph_, gcfg);
  } else if (lstm_unit_) {
    state.entities = concat_rows(nu);
    state.carries.push_back(LstmState::zeros(n, cfg_.node_dim));
  }

  for (std::size_t t = 1; t <= steps; ++t) {
    const ContextEncoding enc =
        cfg_.mrc_only_paragraph
            ? encode_tokens(features, inst.tokens.size(), t - 1, false, encoder_, ecfg, ctx)
            : encode_prefix(features, t, encoder_, ecfg, ctx);
    std::vector<Tensor> nodes = nu;
    if (cfg_.has_graph()) {
      for (std::size_t i = 0; i < n; ++i) nodes[i] = slice_rows(state.entities, i, i + 1);
    }
    std::vector<Tensor> psi = read_step(enc, t, nodes);
    if (!cfg_.has_graph()) continue;
    Tensor incoming = concat_rows(psi);
    out.graph_inputs.push_back(incoming);
    if (graph_) {
      GraphStepTrace gt;
      state = graph_step(state, incoming, *graph_, gcfg, ctx, opt.keep_trace ? &gt : nullptr);
      if (opt.keep_trace) {
        out.trace.back().attention = gt.attention;
        out.trace.back().gate = gt.gate;
        out.trace.back().adjacency = gt.adjacency;
      }
    } else {
      state = lstm_unit_step(state, incoming, *lstm_unit_, gcfg, ctx);
    }
  }

  if (opt.compute_loss) out.loss = scale(add_n(log_likelihood), -1.0);
  return out;
}

PredictionGrid Model::predict(const ProcessInstance& instance, const EmbeddingTable& table) const {
  NoGradGuard guard;
  return run(instance, table, {}, ForwardContext{}).predictions;
}

PredictionGrid predict_process(const Model& model, const ProcessInstance& instance,
                               const EmbeddingTable& table) {
  return model.predict(instance, table);
}

}  // namespace dkg
