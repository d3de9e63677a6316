#include "dkg/reader.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dkg/encoder.hpp"
#include "dkg/error.hpp"

namespace dkg {

ReaderParams ReaderParams::create(ParamSet& params, const ReaderConfig& cfg, Rng& rng) {
  if (cfg.node_dim % 2 != 0) throw Error("reader: node width must be even");
  const std::size_t d = cfg.node_dim;
  ReaderParams p;
  p.question = BiLstmParams::create(params, "reader.question", cfg.embed_dim, d / 2, 1, rng);
  p.question_attn = params.add_uniform("reader.question_attn", {d, 1}, rng);
  p.condition1 = Linear::create(params, "reader.condition1", 2 * d, d, rng);
  p.condition2 = Linear::create(params, "reader.condition2", d, d, rng);
  p.start_bilinear = params.add_uniform("reader.start_bilinear", {cfg.context_dim, d}, rng);
  p.end_bilinear = params.add_uniform("reader.end_bilinear", {cfg.context_dim, d}, rng);
  p.pool_bilinear = params.add_uniform("reader.pool_bilinear", {cfg.context_dim, d}, rng);
  p.classify1 = Linear::create(params, "reader.classify1", d + cfg.context_dim, d, rng);
  p.classify2 = Linear::create(params, "reader.classify2", d, kStateClasses, rng);
  return p;
}

ReaderParams ReaderParams::bind(const ParamSet& params) {
  ReaderParams p;
  p.question = BiLstmParams::bind(params, "reader.question", 1);
  p.question_attn = params.get("reader.question_attn");
  p.condition1 = Linear::bind(params, "reader.condition1");
  p.condition2 = Linear::bind(params, "reader.condition2");
  p.start_bilinear = params.get("reader.start_bilinear");
  p.end_bilinear = params.get("reader.end_bilinear");
  p.pool_bilinear = params.get("reader.pool_bilinear");
  p.classify1 = Linear::bind(params, "reader.classify1");
  p.classify2 = Linear::bind(params, "reader.classify2");
  return p;
}

std::vector<std::string> make_question(const std::string& entity_name) {
  std::vector<std::string> q{"where", "is"};
  for (auto& tok : tokenize(entity_name)) q.push_back(std::move(tok));
  q.push_back("located");
  q.push_back("?");
  return q;
}

QuestionEncoding encode_question(const std::vector<std::string>& question,
                                 const EmbeddingTable& table, const ReaderParams& params,
                                 const ReaderConfig& cfg, const ForwardContext& ctx) {
  if (question.empty()) throw Error("encode_question: empty question");
  std::vector<Tensor> inputs;
  inputs.reserve(question.size());
  for (const auto& tok : question) inputs.push_back(Tensor::row(table.lookup(tok)));
  const auto encoded = bilstm_encode(inputs, params.question, cfg.rnn_dropout, ctx);
  Tensor states = concat_rows(encoded);  // L x d
  Tensor weights = softmax_rows(transpose(matmul(states, params.question_attn)));
  return {matmul(weights, states), weights};
}

Tensor condition_on_entity(const Tensor& question, const Tensor& entity_node,
                           const ReaderParams& params, const ReaderConfig& cfg,
                           const ForwardContext& ctx) {
  if (question.cols() + entity_node.cols() != params.condition1.in_dim()) {
    throw ShapeError("condition_on_entity: question " + to_string(question.shape()) + " and node " +
                     to_string(entity_node.shape()) + " do not fit an input of width " +
                     std::to_string(params.condition1.in_dim()));
  }
  Tensor hidden = tanh(params.condition1(concat_cols({question, entity_node})));
  return params.condition2(ctx.drop(hidden, cfg.dropout));
}

SpanScores score_spans(const Tensor& tokens, const Tensor& conditioned, const ReaderParams& params) {
  Tensor tokens_t = transpose(tokens);
  Tensor start = matmul(matmul(conditioned, transpose(params.start_bilinear)), tokens_t);
  Tensor end = matmul(matmul(conditioned, transpose(params.end_bilinear)), tokens_t);
  return {log_softmax_rows(start), log_softmax_rows(end)};
}

TokenSpan decode_best_span(std::span<const Real> start_scores, std::span<const Real> end_scores,
                           std::size_t max_length) {
  if (start_scores.empty() || start_scores.size() != end_scores.size()) {
    throw Error("decode_best_span: score vectors must be nonempty and equally long");
  }
  if (max_length == 0) throw Error("decode_best_span: max length must be positive");
  TokenSpan best{0, 0};
  Real best_score = -std::numeric_limits<Real>::infinity();
  const std::size_t n = start_scores.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t last = std::min(n - 1, i + max_length - 1);
    for (std::size_t j = i; j <= last; ++j) {
      const Real s = start_scores[i] + end_scores[j];
      if (s > best_score) {
        best_score = s;
        best = {i, j};
      }
    }
  }
  return best;
}

PrefixSummary summarize_prefix(const Tensor& tokens, const Tensor& conditioned,
                               const ReaderParams& params) {
  Tensor scores = matmul(matmul(conditioned, transpose(params.pool_bilinear)), transpose(tokens));
  Tensor weights = softmax_rows(scores);
  return {matmul(weights, tokens), weights};
}

Tensor classify_state(const Tensor& entity_node, const Tensor& summary, const ReaderParams& params,
                      const ReaderConfig& cfg, const ForwardContext& ctx) {
  if (entity_node.cols() + summary.cols() != params.classify1.in_dim()) {
    throw ShapeError("classify_state: node " + to_string(entity_node.shape()) + " and summary " +
                     to_string(summary.shape()) + " do not fit the classifier");
  }
  Tensor hidden = tanh(params.classify1(concat_cols({entity_node, summary})));
  return log_softmax_rows(params.classify2(ctx.drop(hidden, cfg.dropout)));
}

ReadResult read(const Tensor& tokens, const QuestionEncoding& question, const Tensor& entity_node,
                const ReaderParams& params, const Linear& span_proj, const SpecialLocations& specials,
                const ReaderConfig& cfg, const ForwardContext& ctx) {
  ReadResult r;
  r.conditioned = condition_on_entity(question.vector, entity_node, params, cfg, ctx);
  r.scores = score_spans(tokens, r.conditioned, params);
  r.summary = summarize_prefix(tokens, r.conditioned, params);
  r.class_log_probs = classify_state(entity_node, r.summary.vector, params, cfg, ctx);

  const auto lp = r.class_log_probs.values();
  std::size_t best = 0;
  for (std::size_t k = 0; k < kStateClasses; ++k) {
    r.prediction.probs[k] = std::exp(lp[k]);
    if (lp[k] > lp[best]) best = k;
  }
  r.prediction.kind = static_cast<LocationKind>(best);
  r.prediction.span = decode_best_span(r.scores.start_log_probs.values(),
                                       r.scores.end_log_probs.values(), cfg.max_span_length);
  switch (r.prediction.kind) {
    case LocationKind::kSpan: r.psi = span_projection(tokens, r.prediction.span, span_proj); break;
    case LocationKind::kNowhere: r.psi = specials.nowhere; break;
    case LocationKind::kSomewhere: r.psi = specials.somewhere; break;
  }
  return r;
}

}  // namespace dkg
