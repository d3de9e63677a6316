#include "dkg/train.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>

#include "dkg/error.hpp"

namespace dkg {

void TrainConfig::validate() const {
  model.validate();
  if (!(learning_rate > 0)) throw UsageError("learning rate must be positive");
  if (batch_size == 0) throw UsageError("batch size must be positive");
  if (epochs == 0) throw UsageError("epoch count must be positive");
  if (patience == 0) throw UsageError("patience must be positive");
}

std::string metrics_csv_header() { return "epoch,loss,cat1,cat2,cat3,macro,micro,seconds"; }

std::string to_csv_row(const EpochMetrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu,%.6f,%.4f,%.4f,%.4f,%.4f,%.4f,%.3f", m.epoch, m.loss, m.cat1,
                m.cat2, m.cat3, m.macro, m.micro, m.seconds);
  return buf;
}

double teacher_forced_step(Model& model, AdamState& optimizer,
                           const std::vector<const ProcessInstance*>& batch,
                           const EmbeddingTable& table, Rng& dropout_rng) {
  if (batch.empty()) throw Error("teacher_forced_step: empty batch");
  model.params().zero_grad();
  const ForwardContext ctx{true, &dropout_rng};
  const RunOptions opt{true, true, false};
  std::vector<Tensor> losses;
  for (const ProcessInstance* inst : batch) losses.push_back(model.run(*inst, table, opt, ctx).loss);
  Tensor total = losses.size() == 1 ? losses.front() : add_n(losses);
  const double value = total.item();
  backward(total);
  adam_step(model.params(), optimizer);
  return value;
}

std::vector<StateTable> predict_tables(const Model& model, const std::vector<ProcessInstance>& corpus,
                                       const EmbeddingTable& table) {
  std::vector<StateTable> out;
  out.reserve(corpus.size());
  for (const auto& inst : corpus) out.push_back(model.predict(inst, table).table(inst));
  return out;
}

Task1Report evaluate_task1(const Model& model, const std::vector<ProcessInstance>& corpus,
                           const EmbeddingTable& table) {
  std::vector<StateTable> gold;
  gold.reserve(corpus.size());
  for (const auto& inst : corpus) gold.push_back(gold_table(inst));
  return score_task1(predict_tables(model, corpus, table), gold);
}

TrainResult train(Model& model, const std::vector<ProcessInstance>& train_set,
                  const std::vector<ProcessInstance>& dev, const EmbeddingTable& table,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_set.empty()) throw Error("train: empty training corpus");
  if (dev.empty()) throw Error("train: empty dev corpus");

  AdamState optimizer;
  optimizer.learning_rate = cfg.learning_rate;
  Rng shuffle_rng(cfg.seed);
  Rng dropout_rng(cfg.seed ^ 0x5deece66dULL);

  TrainResult result;
  result.best = model.params().clone();
  std::vector<std::size_t> order(train_set.size());
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochMetrics m;
    m.epoch = epoch;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      std::vector<const ProcessInstance*> batch;
      for (std::size_t k = b; k < std::min(order.size(), b + cfg.batch_size); ++k) {
        batch.push_back(&train_set[order[k]]);
      }
      m.loss += teacher_forced_step(model, optimizer, batch, table, dropout_rng);
    }
    const Task1Report report = evaluate_task1(model, dev, table);
    m.cat1 = report.cat(0);
    m.cat2 = report.cat(1);
    m.cat3 = report.cat(2);
    m.macro = report.macro;
    m.micro = report.micro;
    m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.log.push_back(m);
    if (on_epoch) on_epoch(m, model);

    if (m.micro > result.best_micro) {
      result.best_micro = m.micro;
      result.best_epoch = epoch;
      result.best.assign(model.params());
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
    if (m.micro >= cfg.target_micro) break;
  }
  return result;
}

}  // namespace dkg
