#include <gtest/gtest.h>

#include <limits>

#include "dkg/encoder.hpp"
#include "dkg/reader.hpp"
#include "suites.hpp"

namespace dkg {
namespace {

using testing::random_tensor;

EncoderConfig small_encoder() {
  EncoderConfig c;
  c.embed_dim = 6;
  c.hidden = 3;
  c.layers = 2;
  c.proj_dim = 4;
  return c;
}

bool same_values(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() && std::equal(a.values().begin(), a.values().end(), b.values().begin());
}

TEST(Question, Template) {
  EXPECT_EQ(make_question("Carbon dioxide"),
            (std::vector<std::string>{"where", "is", "carbon", "dioxide", "located", "?"}));
}

TEST(DecodeSpan, MatchesExhaustiveSearch) {
  Rng rng(1);
  std::uniform_int_distribution<int> small(-3, 3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t len = 1 + trial % 9;
    const std::size_t max_len = 1 + trial % 4;
    std::vector<Real> s(len), e(len);
    // Small integer scores force frequent ties.
    for (auto& v : s) v = small(rng);
    for (auto& v : e) v = small(rng);
    TokenSpan best{0, 0};
    Real best_score = -std::numeric_limits<Real>::infinity();
    for (std::size_t i = 0; i < len; ++i) {
      for (std::size_t j = i; j < len && j < i + max_len; ++j) {
        if (s[i] + e[j] > best_score) {
          best_score = s[i] + e[j];
          best = {i, j};
        }
      }
    }
    EXPECT_EQ(decode_best_span(s, e, max_len), best) << "trial " << trial;
  }
}

TEST(DecodeSpan, RespectsMaximumLength) {
  const std::vector<Real> s{5, 0, 0, 0}, e{0, 0, 0, 5};
  EXPECT_EQ(decode_best_span(s, e, 4), (TokenSpan{0, 3}));
  const TokenSpan limited = decode_best_span(s, e, 3);
  EXPECT_LE(limited.length(), 3u);
}

TEST(Encoder, PrefixIgnoresLaterSentences) {
  const EncoderConfig cfg = small_encoder();
  Rng rng(3);
  ParamSet ps;
  EncoderParams p = EncoderParams::create(ps, cfg, rng);
  const auto table = EmbeddingTable::hashed(cfg.embed_dim, 1);
  const auto a = make_instance("a", {{"water", "enters", "the", "root", "."}, {"it", "rises", "."}}, {"water"});
  const auto b = make_instance("b", {{"water", "enters", "the", "root", "."}, {"sugar", "forms", "here", "."}},
                               {"water"});
  const auto q = std::vector<std::vector<std::string>>{make_question("water")};
  NoGradGuard guard;
  auto fa = PassageFeatures::build(a, table, q), fb = PassageFeatures::build(b, table, q);
  auto ea = encode_prefix(fa, 1, p, cfg, ForwardContext{});
  auto eb = encode_prefix(fb, 1, p, cfg, ForwardContext{});
  ASSERT_EQ(ea.length(), 5u);
  EXPECT_EQ(ea.width(), cfg.context_dim());
  EXPECT_TRUE(same_values(ea.token_matrix(0), eb.token_matrix(0)));
  auto full_a = encode_prefix(fa, 2, p, cfg, ForwardContext{});
  EXPECT_EQ(full_a.length(), 8u);
  EXPECT_FALSE(same_values(slice_rows(full_a.token_matrix(0), 0, 5), ea.token_matrix(0)));
}

TEST(Encoder, InitialPassDiffersFromFirstPrefix) {
  const EncoderConfig cfg = small_encoder();
  Rng rng(4);
  ParamSet ps;
  EncoderParams p = EncoderParams::create(ps, cfg, rng);
  const auto table = EmbeddingTable::hashed(cfg.embed_dim, 1);
  const auto inst = testing::toy_instance();
  const auto q = std::vector<std::vector<std::string>>{make_question("water"), make_question("sugar")};
  NoGradGuard guard;
  auto f = PassageFeatures::build(inst, table, q);
  auto init = encode_initial(f, p, cfg, ForwardContext{});
  auto first = encode_prefix(f, 1, p, cfg, ForwardContext{});
  EXPECT_EQ(init.length(), first.length());
  EXPECT_FALSE(same_values(init.token_matrix(0), first.token_matrix(0)));
  // Question rows differ through the exact-match flag.
  EXPECT_FALSE(same_values(first.token_matrix(0), first.token_matrix(1)));
}

TEST(Encoder, EntityInitSumsVisibleMentions) {
  Rng rng(5);
  ParamSet ps;
  Linear proj = Linear::create(ps, "p", 6, 4, rng);
  Tensor tokens = random_tensor({6, 3}, rng);
  const std::vector<TokenSpan> mentions{{0, 1}, {3, 3}, {7, 8}};
  NoGradGuard guard;
  auto v = entity_init(tokens, mentions, proj);
  ASSERT_TRUE(v.has_value());
  Tensor expected = add(span_projection(tokens, {0, 1}, proj), span_projection(tokens, {3, 3}, proj));
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(v->at(0, k), expected.at(0, k), 1e-12);
  const std::vector<TokenSpan> outside{{7, 8}};
  EXPECT_FALSE(entity_init(tokens, outside, proj).has_value());
}

TEST(Encoder, SpanProjectionUsesEndpoints) {
  Linear proj{Tensor::from_values({4, 1}, {1, 10, 100, 1000}), Tensor::row({0})};
  Tensor tokens = Tensor::from_values({3, 2}, {1, 2, 3, 4, 5, 6});
  NoGradGuard guard;
  EXPECT_DOUBLE_EQ(span_projection(tokens, {0, 2}, proj).item(), 1 + 20 + 500 + 6000);
}

TEST(Reader, PsiFollowsPredictedClass) {
  ReaderConfig cfg;
  cfg.embed_dim = 5;
  cfg.context_dim = 6;
  cfg.node_dim = 4;
  cfg.max_span_length = 3;
  Rng rng(6);
  ParamSet ps;
  ReaderParams rp = ReaderParams::create(ps, cfg, rng);
  Linear proj = Linear::create(ps, "proj", 12, 4, rng);
  SpecialLocations specials{random_tensor({1, 4}, rng), random_tensor({1, 4}, rng)};
  const auto table = EmbeddingTable::hashed(cfg.embed_dim, 2);
  NoGradGuard guard;
  auto q = encode_question(make_question("water"), table, rp, cfg, ForwardContext{});
  std::size_t seen = 0;
  for (int trial = 0; trial < 60 && seen != 7; ++trial) {
    Tensor tokens = random_tensor({5, 6}, rng, 3.0);
    Tensor e = random_tensor({1, 4}, rng, 3.0);
    ReadResult r = read(tokens, q, e, rp, proj, specials, cfg, ForwardContext{});
    EXPECT_LE(r.prediction.span.length(), cfg.max_span_length);
    EXPECT_NEAR(r.prediction.probs[0] + r.prediction.probs[1] + r.prediction.probs[2], 1.0, 1e-12);
    switch (r.prediction.kind) {
      case LocationKind::kNowhere:
        EXPECT_TRUE(same_values(r.psi, specials.nowhere));
        seen |= 1;
        break;
      case LocationKind::kSomewhere:
        EXPECT_TRUE(same_values(r.psi, specials.somewhere));
        seen |= 2;
        break;
      case LocationKind::kSpan:
        EXPECT_TRUE(same_values(r.psi, span_projection(tokens, r.prediction.span, proj)));
        seen |= 4;
        break;
    }
  }
  EXPECT_NE(seen, 0u);
}

}  // namespace
}  // namespace dkg
