#include <benchmark/benchmark.h>

#include "dkg/eval.hpp"
#include "dkg/graph.hpp"
#include "dkg/model.hpp"
#include "dkg/nn.hpp"
#include "dkg/train.hpp"

namespace {

using namespace dkg;

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  std::uniform_real_distribution<Real> d(-1, 1);
  Tensor t = Tensor::zeros({r, c});
  for (auto& v : t.mutable_values()) v = d(rng);
  return t;
}

void BM_LstmCell(benchmark::State& state) {
  const auto hid = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  ParamSet ps;
  LstmParams p = LstmParams::create(ps, "c", hid, hid, rng);
  Tensor x = random_matrix(8, hid, rng);
  LstmState s = LstmState::zeros(8, hid);
  NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(lstm_cell(x, s, p).h);
}
BENCHMARK(BM_LstmCell)->Arg(32)->Arg(64)->Arg(128);

void BM_BiLstmEncode(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  ParamSet ps;
  BiLstmParams p = BiLstmParams::create(ps, "b", 53, 64, 2, rng);
  std::vector<Tensor> xs;
  for (std::size_t j = 0; j < len; ++j) xs.push_back(random_matrix(4, 53, rng));
  NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(bilstm_encode(xs, p, 0.0, ForwardContext{}));
}
BENCHMARK(BM_BiLstmEncode)->Arg(20)->Arg(80);

void BM_GraphStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  ParamSet ps;
  GraphConfig cfg;
  GraphParams gp = GraphParams::create(ps, cfg, rng);
  GraphState g = init_graph(random_matrix(n, cfg.node_dim, rng), gp, cfg);
  Tensor psi = random_matrix(n, cfg.node_dim, rng);
  NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(graph_step(g, psi, gp, cfg, ForwardContext{}).entities);
}
BENCHMARK(BM_GraphStep)->Arg(4)->Arg(16);

void BM_ProcessForwardBackward(benchmark::State& state) {
  const Model model(ModelConfig{}, 1);
  const auto inst = synth_corpus(1, 1).front();
  const auto table = EmbeddingTable::hashed(50, 1);
  for (auto _ : state) {
    ProcessOutput out = model.run(inst, table, {true, true, false}, ForwardContext{});
    backward(out.loss);
  }
  state.SetLabel(std::to_string(inst.num_sentences()) + " sentences, " + std::to_string(inst.num_entities()) +
                 " entities");
}
BENCHMARK(BM_ProcessForwardBackward)->Unit(benchmark::kMillisecond);

void BM_PredictProcess(benchmark::State& state) {
  const Model model(ModelConfig{}, 1);
  const auto inst = synth_corpus(1, 1).front();
  const auto table = EmbeddingTable::hashed(50, 1);
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(inst, table));
}
BENCHMARK(BM_PredictProcess)->Unit(benchmark::kMillisecond);

void BM_ScoreTask1(benchmark::State& state) {
  std::vector<StateTable> golds;
  for (const auto& inst : synth_corpus(5, static_cast<std::size_t>(state.range(0)))) golds.push_back(gold_table(inst));
  for (auto _ : state) benchmark::DoNotOptimize(score_task1(golds, golds).micro);
}
BENCHMARK(BM_ScoreTask1)->Arg(100)->Arg(1000);

}  // namespace
BENCHMARK_MAIN();
