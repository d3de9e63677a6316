#pragma once

// Contextual encoding of paragraph prefixes and fixed-width span vectors.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dkg/corpus.hpp"
#include "dkg/embeddings.hpp"
#include "dkg/nn.hpp"

namespace dkg {

// Per-token indicator features appended to the word vector: the token occurs
// in the question, the token lies in the current sentence, and the pass is
// the initial (pre-first-sentence) one.
inline constexpr std::size_t kTokenFeatureCount = 3;

struct EncoderConfig {
  std::size_t embed_dim = 50;
  std::size_t hidden = 64;
  std::size_t layers = 2;
  std::size_t proj_dim = 64;
  Real rnn_dropout = 0.4;

  std::size_t context_dim() const { return 2 * hidden; }
};

struct EncoderParams {
  BiLstmParams context;
  Linear span_proj;  // [c_start; c_end] -> proj_dim
  Linear fallback;   // mean name embedding -> proj_dim, for unmentioned entities

  static EncoderParams create(ParamSet& params, const EncoderConfig& cfg, Rng& rng);
  static EncoderParams bind(const ParamSet& params, const EncoderConfig& cfg);
};

// Word vectors and question-overlap flags for one paragraph, shared across
// every step of a pass. Row q of `exact_match` belongs to questions[q].
struct PassageFeatures {
  const ProcessInstance* instance = nullptr;
  std::vector<std::vector<Real>> embeddings;
  std::vector<std::vector<bool>> exact_match;

  static PassageFeatures build(const ProcessInstance& instance, const EmbeddingTable& table,
                               const std::vector<std::vector<std::string>>& questions);
  std::size_t batch() const { return exact_match.size(); }
};

// One context vector per token of the encoded range, batched over questions.
struct ContextEncoding {
  std::vector<Tensor> positions;  // each batch x context width
  std::size_t step = 0;

  std::size_t length() const { return positions.size(); }
  std::size_t width() const { return positions.front().cols(); }
  // length x width matrix of the vectors seen by question `row`.
  Tensor token_matrix(std::size_t row) const;
};

// Encodes the first `token_count` tokens. `current_sentence` (0-based) marks
// the sentence flag; `initial` sets the initial-pass flag.
ContextEncoding encode_tokens(const PassageFeatures& features, std::size_t token_count,
                              std::optional<std::size_t> current_sentence, bool initial,
                              const EncoderParams& params, const EncoderConfig& cfg,
                              const ForwardContext& ctx);

// Sentences 1..t, with sentence t flagged as current (1 <= t <= T).
ContextEncoding encode_prefix(const PassageFeatures& features, std::size_t t,
                              const EncoderParams& params, const EncoderConfig& cfg,
                              const ForwardContext& ctx);

// Encoding used before any sentence is read: sentence 1 only, with the
// initial-pass flag set and no current-sentence flag.
ContextEncoding encode_initial(const PassageFeatures& features, const EncoderParams& params,
                               const EncoderConfig& cfg, const ForwardContext& ctx);

// proj([c_start; c_end]) over a length x width token matrix.
Tensor span_projection(const Tensor& tokens, const TokenSpan& span, const Linear& proj);

// Sum of span projections of the mentions inside the encoded range. Returns
// nullopt when no mention is inside it.
std::optional<Tensor> entity_init(const Tensor& tokens, std::span<const TokenSpan> mentions,
                                  const Linear& proj);

// Fallback for entities without a visible mention: projection of the mean
// word vector of the entity name.
Tensor entity_fallback(const Entity& entity, const EmbeddingTable& table, const Linear& fallback);

}  // namespace dkg
