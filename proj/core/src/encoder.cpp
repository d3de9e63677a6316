#include "dkg/encoder.hpp"

#include <algorithm>
#include <set>

#include "dkg/error.hpp"

namespace dkg {

EncoderParams EncoderParams::create(ParamSet& params, const EncoderConfig& cfg, Rng& rng) {
  EncoderParams p;
  p.context = BiLstmParams::create(params, "encoder.context", cfg.embed_dim + kTokenFeatureCount,
                                   cfg.hidden, cfg.layers, rng);
  p.span_proj = Linear::create(params, "encoder.span_proj", 2 * cfg.context_dim(), cfg.proj_dim, rng);
  p.fallback = Linear::create(params, "encoder.fallback", cfg.embed_dim, cfg.proj_dim, rng);
  return p;
}

EncoderParams EncoderParams::bind(const ParamSet& params, const EncoderConfig& cfg) {
  return {BiLstmParams::bind(params, "encoder.context", cfg.layers),
          Linear::bind(params, "encoder.span_proj"), Linear::bind(params, "encoder.fallback")};
}

PassageFeatures PassageFeatures::build(const ProcessInstance& instance, const EmbeddingTable& table,
                                       const std::vector<std::vector<std::string>>& questions) {
  PassageFeatures f;
  f.instance = &instance;
  f.embeddings.reserve(instance.tokens.size());
  for (const auto& tok : instance.tokens) f.embeddings.push_back(table.lookup(tok));
  for (const auto& q : questions) {
    const std::set<std::string> words(q.begin(), q.end());
    std::vector<bool> flags(instance.tokens.size());
    for (std::size_t j = 0; j < flags.size(); ++j) flags[j] = words.count(instance.tokens[j]) != 0;
    f.exact_match.push_back(std::move(flags));
  }
  return f;
}

Tensor ContextEncoding::token_matrix(std::size_t row) const { return gather_rows(positions, row); }

ContextEncoding encode_tokens(const PassageFeatures& features, std::size_t token_count,
                              std::optional<std::size_t> current_sentence, bool initial,
                              const EncoderParams& params, const EncoderConfig& cfg,
                              const ForwardContext& ctx) {
  const ProcessInstance& inst = *features.instance;
  if (token_count == 0 || token_count > inst.tokens.size()) {
    throw Error("encode_tokens: token count " + std::to_string(token_count) + " outside 1.." +
                std::to_string(inst.tokens.size()));
  }
  const std::size_t batch = features.batch();
  if (batch == 0) throw Error("encode_tokens: no questions");
  const std::size_t in_dim = cfg.embed_dim + kTokenFeatureCount;
  SentenceRange current{0, 0};
  if (current_sentence) current = inst.sentences.at(*current_sentence);

  std::vector<Tensor> inputs;
  inputs.reserve(token_count);
  for (std::size_t j = 0; j < token_count; ++j) {
    const auto& emb = features.embeddings[j];
    if (emb.size() != cfg.embed_dim) throw ShapeError("encode_tokens: embedding width mismatch");
    std::vector<Real> v(batch * in_dim);
    for (std::size_t b = 0; b < batch; ++b) {
      Real* row = v.data() + b * in_dim;
      std::copy(emb.begin(), emb.end(), row);
      row[cfg.embed_dim] = features.exact_match[b][j] ? 1.0 : 0.0;
      row[cfg.embed_dim + 1] = (j >= current.begin && j < current.end) ? 1.0 : 0.0;
      row[cfg.embed_dim + 2] = initial ? 1.0 : 0.0;
    }
    inputs.push_back(Tensor::from_values({batch, in_dim}, std::move(v)));
  }
  ContextEncoding enc;
  enc.positions = bilstm_encode(inputs, params.context, cfg.rnn_dropout, ctx);
  enc.step = current_sentence ? *current_sentence + 1 : 0;
  return enc;
}

ContextEncoding encode_prefix(const PassageFeatures& features, std::size_t t,
                              const EncoderParams& params, const EncoderConfig& cfg,
                              const ForwardContext& ctx) {
  const ProcessInstance& inst = *features.instance;
  if (t < 1 || t > inst.num_sentences()) {
    throw Error("encode_prefix: step " + std::to_string(t) + " outside 1.." +
                std::to_string(inst.num_sentences()));
  }
  return encode_tokens(features, inst.prefix_length(t), t - 1, false, params, cfg, ctx);
}

ContextEncoding encode_initial(const PassageFeatures& features, const EncoderParams& params,
                               const EncoderConfig& cfg, const ForwardContext& ctx) {
  ContextEncoding enc =
      encode_tokens(features, features.instance->prefix_length(1), std::nullopt, true, params, cfg, ctx);
  enc.step = 0;
  return enc;
}

Tensor span_projection(const Tensor& tokens, const TokenSpan& span, const Linear& proj) {
  if (span.start > span.end || span.end >= tokens.rows()) {
    throw Error("span_projection: span " + std::to_string(span.start) + ":" +
                std::to_string(span.end) + " outside prefix of " + std::to_string(tokens.rows()) +
                " tokens");
  }
  Tensor pair = concat_cols({slice_rows(tokens, span.start, span.start + 1),
                             slice_rows(tokens, span.end, span.end + 1)});
  return proj(pair);
}

std::optional<Tensor> entity_init(const Tensor& tokens, std::span<const TokenSpan> mentions,
                                  const Linear& proj) {
  std::vector<Tensor> parts;
  for (const auto& m : mentions) {
    if (m.end < tokens.rows()) parts.push_back(span_projection(tokens, m, proj));
  }
  if (parts.empty()) return std::nullopt;
  return parts.size() == 1 ? parts.front() : add_n(parts);
}

Tensor entity_fallback(const Entity& entity, const EmbeddingTable& table, const Linear& fallback) {
  std::vector<Real> mean(table.dim(), 0.0);
  for (const auto& tok : entity.tokens) {
    const auto v = table.lookup(tok);
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += v[k];
  }
  if (!entity.tokens.empty()) {
    for (auto& x : mean) x /= static_cast<Real>(entity.tokens.size());
  }
  return fallback(Tensor::row(std::move(mean)));
}

}  // namespace dkg
