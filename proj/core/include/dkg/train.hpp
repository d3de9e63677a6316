#pragma once

// Teacher-forced mini-batch training with per-epoch dev scoring, best-model
// retention and early stopping.

#include <functional>
#include <string>
#include <vector>

#include "dkg/adam.hpp"
#include "dkg/eval.hpp"
#include "dkg/model.hpp"

namespace dkg {

struct TrainConfig {
  ModelConfig model;
  Real learning_rate = 0.002;
  std::size_t batch_size = 8;
  std::size_t epochs = 200;
  std::uint64_t seed = 1;
  std::size_t patience = 10;
  // Training stops once the dev micro-average reaches this value.
  double target_micro = 100.0;

  void validate() const;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double loss = 0;  // summed over the epoch
  double cat1 = 0, cat2 = 0, cat3 = 0, macro = 0, micro = 0;
  double seconds = 0;
};

std::string metrics_csv_header();
std::string to_csv_row(const EpochMetrics& m);

struct TrainResult {
  ParamSet best;  // values of the best epoch
  std::size_t best_epoch = 0;
  double best_micro = -1;
  std::vector<EpochMetrics> log;
};

// Called after every epoch with its metrics and the current (not best) model.
using EpochCallback = std::function<void(const EpochMetrics&, const Model&)>;

// One optimizer update over `batch`; returns the summed loss.
double teacher_forced_step(Model& model, AdamState& optimizer,
                           const std::vector<const ProcessInstance*>& batch,
                           const EmbeddingTable& table, Rng& dropout_rng);

std::vector<StateTable> predict_tables(const Model& model, const std::vector<ProcessInstance>& corpus,
                                       const EmbeddingTable& table);

Task1Report evaluate_task1(const Model& model, const std::vector<ProcessInstance>& corpus,
                           const EmbeddingTable& table);

// Trains `model` in place. `dev` may be the training corpus.
TrainResult train(Model& model, const std::vector<ProcessInstance>& train_set,
                  const std::vector<ProcessInstance>& dev, const EmbeddingTable& table,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

}  // namespace dkg
