#pragma once

// Entity-conditioned span-extraction reader.
//
// The reader asks "where is E located ?" against an encoded prefix. The
// pooled question vector is joined with the entity's graph node and passed
// through a two-layer MLP; the result drives bilinear start/end scores over
// the prefix tokens. A separate three-way classifier decides whether the
// entity is nowhere, somewhere, or at the decoded span.

#include <array>
#include <string>
#include <vector>

#include "dkg/corpus.hpp"
#include "dkg/embeddings.hpp"
#include "dkg/nn.hpp"

namespace dkg {

struct ReaderConfig {
  std::size_t embed_dim = 50;
  std::size_t context_dim = 128;  // width of the prefix encoding
  std::size_t node_dim = 64;      // width of questions and graph nodes
  std::size_t max_span_length = 15;
  Real dropout = 0.3;
  Real rnn_dropout = 0.4;
};

struct ReaderParams {
  BiLstmParams question;  // one layer, node_dim / 2 per direction
  Tensor question_attn;   // node_dim x 1
  Linear condition1;      // [q; e] -> node_dim
  Linear condition2;      // node_dim -> node_dim
  Tensor start_bilinear;  // context_dim x node_dim
  Tensor end_bilinear;
  Tensor pool_bilinear;
  Linear classify1;  // [e; summary] -> node_dim
  Linear classify2;  // node_dim -> 3

  static ReaderParams create(ParamSet& params, const ReaderConfig& cfg, Rng& rng);
  static ReaderParams bind(const ParamSet& params);
};

// Indices match LocationKind.
inline constexpr std::size_t kStateClasses = 3;

struct QuestionEncoding {
  Tensor vector;   // 1 x node_dim
  Tensor weights;  // 1 x question length, sums to one
};

struct SpanScores {
  Tensor start_log_probs;  // 1 x prefix length
  Tensor end_log_probs;
};

struct PrefixSummary {
  Tensor vector;   // 1 x context_dim
  Tensor weights;  // 1 x prefix length
};

struct StatePrediction {
  LocationKind kind = LocationKind::kNowhere;
  std::array<Real, kStateClasses> probs{};
  TokenSpan span;  // decoded span; reported only when kind == kSpan
};

struct ReadResult {
  StatePrediction prediction;
  SpanScores scores;
  Tensor class_log_probs;  // 1 x 3
  PrefixSummary summary;
  Tensor conditioned;  // entity-dependent question, 1 x node_dim
  Tensor psi;          // location vector handed to the graph
};

// Learned vectors standing in for the two locations that are not text spans.
struct SpecialLocations {
  Tensor nowhere;    // 1 x node_dim
  Tensor somewhere;  // 1 x node_dim
};

std::vector<std::string> make_question(const std::string& entity_name);

QuestionEncoding encode_question(const std::vector<std::string>& question,
                                 const EmbeddingTable& table, const ReaderParams& params,
                                 const ReaderConfig& cfg, const ForwardContext& ctx);

Tensor condition_on_entity(const Tensor& question, const Tensor& entity_node,
                           const ReaderParams& params, const ReaderConfig& cfg,
                           const ForwardContext& ctx);

SpanScores score_spans(const Tensor& tokens, const Tensor& conditioned, const ReaderParams& params);

// Highest start + end score over spans with start <= end < start + max_length;
// ties go to the smaller start, then the smaller end.
TokenSpan decode_best_span(std::span<const Real> start_scores, std::span<const Real> end_scores,
                           std::size_t max_length);

PrefixSummary summarize_prefix(const Tensor& tokens, const Tensor& conditioned,
                               const ReaderParams& params);

// Log-probabilities over {nowhere, somewhere, span}, 1 x 3.
Tensor classify_state(const Tensor& entity_node, const Tensor& summary, const ReaderParams& params,
                      const ReaderConfig& cfg, const ForwardContext& ctx);

// Full query for one entity against one encoded prefix. `specials` may be
// empty when no graph is attached; psi is then left undefined for special
// classes.
ReadResult read(const Tensor& tokens, const QuestionEncoding& question, const Tensor& entity_node,
                const ReaderParams& params, const Linear& span_proj, const SpecialLocations& specials,
                const ReaderConfig& cfg, const ForwardContext& ctx);

}  // namespace dkg
