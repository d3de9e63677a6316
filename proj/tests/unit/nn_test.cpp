#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "dkg/adam.hpp"
#include "dkg/checkpoint.hpp"
#include "dkg/error.hpp"
#include "dkg/nn.hpp"
#include "suites.hpp"

namespace dkg {
namespace {

using testing::random_tensor;

Real sig(Real x) { return 1.0 / (1.0 + std::exp(-x)); }

TEST(Lstm, CellMatchesScalarRecurrence) {
  Rng rng(1);
  ParamSet ps;
  LstmParams p = LstmParams::create(ps, "c", 2, 3, rng);
  Tensor x = random_tensor({1, 2}, rng), h = random_tensor({1, 3}, rng), c = random_tensor({1, 3}, rng);
  LstmState next = lstm_cell(x, {h, c}, p);
  std::vector<Real> in{x.at(0, 0), x.at(0, 1), h.at(0, 0), h.at(0, 1), h.at(0, 2)};
  for (std::size_t k = 0; k < 3; ++k) {
    std::array<Real, 4> z{};
    for (std::size_t g = 0; g < 4; ++g) {
      z[g] = p.bias.at(0, g * 3 + k);
      for (std::size_t r = 0; r < in.size(); ++r) z[g] += in[r] * p.weight.at(r, g * 3 + k);
    }
    const Real cell = sig(z[1]) * c.at(0, k) + sig(z[0]) * std::tanh(z[2]);
    EXPECT_NEAR(next.c.at(0, k), cell, 1e-12);
    EXPECT_NEAR(next.h.at(0, k), sig(z[3]) * std::tanh(cell), 1e-12);
  }
}

TEST(Lstm, RejectsWrongWidths) {
  Rng rng(1);
  ParamSet ps;
  LstmParams p = LstmParams::create(ps, "c", 2, 3, rng);
  EXPECT_THROW(lstm_cell(Tensor::zeros({1, 3}), LstmState::zeros(1, 3), p), ShapeError);
}

TEST(BiLstm, BackwardDirectionSeesOnlyLaterTokens) {
  Rng rng(2);
  ParamSet ps;
  BiLstmParams p = BiLstmParams::create(ps, "b", 3, 4, 1, rng);
  std::vector<Tensor> xs;
  for (int j = 0; j < 5; ++j) xs.push_back(random_tensor({1, 3}, rng));
  auto full = bilstm_encode(xs, p, 0.0, ForwardContext{});
  ASSERT_EQ(full.size(), 5u);
  EXPECT_EQ(full[0].cols(), 8u);
  auto changed = xs;
  changed[4] = random_tensor({1, 3}, rng);
  auto other = bilstm_encode(changed, p, 0.0, ForwardContext{});
  for (std::size_t j = 0; j < 4; ++j) {
    for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(full[j].at(0, k), other[j].at(0, k));
  }
  EXPECT_NE(full[0].at(0, 4), other[0].at(0, 4));
}

TEST(BiLstm, ParameterNamesAndBinding) {
  Rng rng(2);
  ParamSet ps;
  BiLstmParams::create(ps, "enc", 3, 4, 2, rng);
  EXPECT_TRUE(ps.contains("enc.l0.fwd.weight"));
  EXPECT_TRUE(ps.contains("enc.l1.bwd.bias"));
  BiLstmParams bound = BiLstmParams::bind(ps, "enc", 2);
  EXPECT_EQ(bound.output_dim(), 8u);
  EXPECT_EQ(bound.layers[1].forward.input_dim(), 8u);
}

TEST(Linear, AffineMap) {
  Linear l{Tensor::from_values({2, 1}, {2, -1}), Tensor::row({0.5})};
  EXPECT_DOUBLE_EQ(l(Tensor::row({3, 4})).item(), 2.5);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ParamSet ps;
  Tensor w = ps.add_values("w", {1, 3}, {1.0, 1.0, 1.0});
  backward(sum(mul(w, Tensor::row({0.3, -2.0, 0.0}))));
  AdamState s;
  s.learning_rate = 0.01;
  adam_step(ps, s);
  EXPECT_NEAR(w.at(0, 0), 0.99, 1e-6);
  EXPECT_NEAR(w.at(0, 1), 1.01, 1e-6);
  EXPECT_DOUBLE_EQ(w.at(0, 2), 1.0);
  EXPECT_FALSE(w.has_grad());
}

TEST(Adam, ConvergesOnQuadratic) {
  ParamSet ps;
  Tensor w = ps.add_values("w", {1, 2}, {3.0, -4.0});
  AdamState s;
  s.learning_rate = 0.05;
  for (int i = 0; i < 2000; ++i) {
    Tensor d = add_scalar(w, -1.0);
    backward(sum(mul(d, d)));
    adam_step(ps, s);
  }
  EXPECT_NEAR(w.at(0, 0), 1.0, 1e-3);
  EXPECT_NEAR(w.at(0, 1), 1.0, 1e-3);
}

TEST(Checkpoint, RoundTripsAtStoragePrecision) {
  Rng rng(4);
  ParamSet ps;
  ps.add_uniform("a.weight", {3, 4}, rng);
  ps.add_uniform("b", {1, 7}, rng);
  ParamSet back = decode_params(encode_params(ps));
  ASSERT_EQ(back.names(), ps.names());
  ParamSet rounded = ps.clone();
  round_to_storage_precision(rounded);
  for (const auto& name : ps.names()) {
    const auto x = back.get(name).values();
    const auto y = rounded.get(name).values();
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_EQ(x[i], y[i]);
      EXPECT_EQ(x[i], static_cast<Real>(static_cast<float>(ps.get(name).values()[i])));
    }
  }
  EXPECT_EQ(encode_params(back), encode_params(ps));
}

TEST(Checkpoint, RejectsCorruptInput) {
  ParamSet ps;
  ps.add_values("x", {1, 2}, {1, 2});
  auto bytes = encode_params(ps);
  EXPECT_EQ(std::memcmp(bytes.data(), "DKGPARAM", 8), 0);

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_params(bad_magic), ParseError);

  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(decode_params(truncated), ParseError);

  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(decode_params(trailing), ParseError);

  auto version = bytes;
  version[8] = 9;
  EXPECT_THROW(decode_params(version), ParseError);
}

}  // namespace
}  // namespace dkg
