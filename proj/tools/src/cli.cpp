#include "dkg/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "dkg/checkpoint.hpp"
#include "dkg/error.hpp"
#include "dkg/eval.hpp"
#include "dkg/prediction_io.hpp"
#include "dkg/train.hpp"

namespace dkg {
namespace {

namespace fs = std::filesystem;

// Relative input paths missing from the working directory are looked up
// under $DKG_DATA_DIR.
fs::path resolve_input(const std::string& given) {
  fs::path p(given);
  if (p.is_relative() && !fs::exists(p)) {
    if (const char* dir = std::getenv("DKG_DATA_DIR")) {
      fs::path alt = fs::path(dir) / p;
      if (fs::exists(alt)) return alt;
    }
  }
  if (!fs::exists(p)) throw Error("input '" + given + "' does not exist");
  return p;
}

void check_writable(const fs::path& out) {
  const fs::path dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
  if (!fs::is_directory(dir)) throw Error("output directory '" + dir.string() + "' does not exist");
}

struct SynthArgs {
  std::uint64_t seed = 1;
  std::size_t n = 20;
  std::string out;
  SynthOptions opts;
};

struct TrainArgs {
  std::string data, dev, out, log, embeddings;
  TrainConfig cfg;
  std::size_t embed_dim = 50;
  std::uint64_t embed_seed = 0;
};

struct PredictArgs {
  std::string ckpt, data, out;
};

struct EvalArgs {
  std::string task = "1";
  std::string pred, gold, json_out;
};

struct TraceArgs {
  std::string ckpt, data, id, out;
};

void cmd_synth(const SynthArgs& a, std::ostream& out) {
  check_writable(a.out);
  if (a.opts.min_sentences == 0 || a.opts.min_sentences > a.opts.max_sentences ||
      a.opts.min_entities == 0 || a.opts.min_entities > a.opts.max_entities) {
    throw UsageError("sentence and entity ranges must be nonempty");
  }
  const auto corpus = synth_corpus(a.seed, a.n, a.opts);
  write_corpus(fs::path(a.out), corpus);
  out << "wrote " << corpus.size() << " processes to " << a.out << "\n";
}

void cmd_train(TrainArgs a, std::ostream& out, std::ostream& err) {
  a.cfg.validate();
  const auto data_path = resolve_input(a.data);
  const auto dev_path = a.dev.empty() ? data_path : resolve_input(a.dev);
  check_writable(a.out);
  const auto train_set = parse_corpus(data_path);
  const auto dev = parse_corpus(dev_path);
  if (train_set.empty()) throw Error("training corpus '" + data_path.string() + "' is empty");

  CheckpointMeta meta;
  meta.train = a.cfg;
  meta.embeddings.hashed = a.embeddings.empty();
  meta.embeddings.dim = a.embed_dim;
  meta.embeddings.seed = a.embed_seed;
  if (!a.embeddings.empty()) meta.embeddings.path = fs::absolute(resolve_input(a.embeddings)).string();
  meta.train.model.embed_dim = a.embed_dim;

  std::vector<ProcessInstance> all = train_set;
  all.insert(all.end(), dev.begin(), dev.end());
  const EmbeddingTable table = make_embeddings(meta.embeddings, all);
  meta.vocab_hash = table.vocab_hash();
  if (!table.is_hashed()) {
    err << "embedding coverage: " << 100.0 * (1.0 - oov_rate(table, all)) << "% of word types\n";
  }

  const std::string log_path = a.log.empty() ? a.out + ".metrics.csv" : a.log;
  std::ofstream log(log_path);
  if (!log) throw Error("cannot write '" + log_path + "'");
  log << metrics_csv_header() << "\n";

  Model model(meta.train.model, meta.train.seed);
  err << "variant " << meta.train.model.variant() << ", " << model.params().scalar_count()
      << " parameters\n";
  const TrainResult result = train(model, train_set, dev, table, meta.train,
                                   [&](const EpochMetrics& m, const Model&) {
                                     log << to_csv_row(m) << "\n" << std::flush;
                                     err << "epoch " << m.epoch << "  loss " << m.loss << "  micro "
                                         << m.micro << "  (" << m.seconds << "s)\n";
                                   });
  save_model(a.out, result.best, meta);
  out << "best epoch " << result.best_epoch << ", dev micro " << result.best_micro << "; wrote "
      << a.out << "\n";
}

void cmd_predict(const PredictArgs& a, std::ostream& out) {
  const auto ckpt = resolve_input(a.ckpt);
  const auto data_path = resolve_input(a.data);
  check_writable(a.out);
  CheckpointMeta meta;
  const Model model = load_model(ckpt, &meta);
  const auto corpus = parse_corpus(data_path);
  const EmbeddingTable table = make_embeddings(meta.embeddings, corpus);
  write_tables_tsv(fs::path(a.out), predict_tables(model, corpus, table));
  out << "wrote predictions for " << corpus.size() << " processes to " << a.out << "\n";
}

void cmd_eval(const EvalArgs& a, std::ostream& out) {
  const auto pred_path = resolve_input(a.pred);
  const auto gold_path = resolve_input(a.gold);
  const auto preds = read_tables_tsv(pred_path);
  std::string json_text;
  if (a.task == "violations") {
    if (gold_path.extension() == ".tsv") {
      throw UsageError("the violation counter needs mention offsets; pass the gold .jsonl corpus");
    }
    const auto report = count_violations(preds, parse_corpus(gold_path));
    out << to_text(report);
    json_text = to_json(report);
  } else {
    const auto golds = read_tables(gold_path);
    if (a.task == "1") {
      const auto report = score_task1(preds, golds);
      out << to_text(report);
      json_text = to_json(report);
    } else {
      const auto report = score_task2(preds, golds);
      out << to_text(report);
      json_text = to_json(report);
    }
  }
  if (!a.json_out.empty()) {
    check_writable(a.json_out);
    std::ofstream j(a.json_out);
    if (!j) throw Error("cannot write '" + a.json_out + "'");
    j << json_text << "\n";
  }
}

void cmd_trace(const TraceArgs& a, std::ostream& out) {
  const auto ckpt = resolve_input(a.ckpt);
  CheckpointMeta meta;
  const Model model = load_model(ckpt, &meta);
  const auto corpus = parse_corpus(resolve_input(a.data));
  const ProcessInstance* inst = nullptr;
  for (const auto& p : corpus) {
    if (p.id == a.id) inst = &p;
  }
  if (!inst) throw Error("no process with id '" + a.id + "'");
  const EmbeddingTable table = make_embeddings(meta.embeddings, corpus);
  NoGradGuard guard;
  const ProcessOutput output = model.run(*inst, table, {false, false, true}, ForwardContext{});
  out << trace_text(*inst, output);
  const std::string json_text = trace_json(*inst, output);
  if (a.out.empty()) {
    out << json_text << "\n";
  } else {
    check_writable(a.out);
    std::ofstream j(a.out);
    if (!j) throw Error("cannot write '" + a.out + "'");
    j << json_text << "\n";
  }
}

// Options given on the command line keep their values; the file fills the rest.
void apply_config(CLI::App& cmd, const std::string& path) {
  if (!std::filesystem::exists(path)) throw Error("config file '" + path + "' does not exist");
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_file(path)) {
    const std::string key = item.fullname();
    CLI::Option* opt = key == "config" ? nullptr : cmd.get_option_no_throw("--" + key);
    if (opt == nullptr) throw CLI::ConversionError(key, "unknown config key in '" + path + "'");
    if (opt->count() > 0) continue;
    opt->add_result(item.inputs);
    opt->run_callback();
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dynamic knowledge-graph reader for procedural text", "dkg"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Write a synthetic JSONL corpus");
  s->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
  s->add_option("--n", synth.n, "Number of processes")->capture_default_str();
  s->add_option("--out", synth.out, "Output .jsonl path")->required();
  s->add_option("--min-sentences", synth.opts.min_sentences)->capture_default_str();
  s->add_option("--max-sentences", synth.opts.max_sentences)->capture_default_str();
  s->add_option("--min-entities", synth.opts.min_entities)->capture_default_str();
  s->add_option("--max-entities", synth.opts.max_entities)->capture_default_str();

  TrainArgs tr;
  ModelConfig& mc = tr.cfg.model;
  auto* t = app.add_subcommand("train", "Train a model with teacher forcing");
  std::string train_config;
  t->add_option("--config", train_config, "Flat key=value file; command-line flags take precedence");
  t->add_option("--data", tr.data, "Training corpus (.jsonl)")->required();
  t->add_option("--dev", tr.dev, "Dev corpus; defaults to the training corpus");
  t->add_option("--out", tr.out, "Checkpoint path")->required();
  t->add_option("--log", tr.log, "Metrics CSV; defaults to <out>.metrics.csv");
  t->add_option("--seed", tr.cfg.seed)->capture_default_str();
  t->add_option("--epochs", tr.cfg.epochs)->capture_default_str();
  t->add_option("--batch-size", tr.cfg.batch_size)->capture_default_str();
  t->add_option("--lr", tr.cfg.learning_rate)->capture_default_str();
  t->add_option("--patience", tr.cfg.patience)->capture_default_str();
  t->add_option("--target-micro", tr.cfg.target_micro, "Stop once dev micro reaches this")
      ->capture_default_str();
  t->add_option("--hidden", mc.hidden, "Encoder LSTM width per direction")->capture_default_str();
  t->add_option("--encoder-layers", mc.encoder_layers)->capture_default_str();
  t->add_option("--node-dim", mc.node_dim, "Graph node and question width")->capture_default_str();
  t->add_option("--graph-layers", mc.graph_layers)->capture_default_str();
  t->add_option("--max-span", mc.max_span_length)->capture_default_str();
  t->add_option("--rnn-dropout", mc.rnn_dropout)->capture_default_str();
  t->add_option("--mlp-dropout", mc.mlp_dropout)->capture_default_str();
  t->add_option("--embeddings", tr.embeddings, "word-vector text file; hashed vectors if omitted");
  t->add_option("--embed-dim", tr.embed_dim)->capture_default_str();
  t->add_option("--embed-seed", tr.embed_seed, "Seed of the hashed vectors")->capture_default_str();
  t->add_flag("--no-coref-across", mc.no_coref_across, "Drop the gated attention over previous locations");
  t->add_flag("--no-coref-within", mc.no_coref_within, "Drop the within-step location self-attention");
  t->add_flag("--lstm-graph-unit", mc.lstm_graph_unit, "Replace the graph with a per-entity LSTM");
  t->add_flag("--mrc-only-prefix", mc.mrc_only_prefix, "Reader only, over the prefix");
  t->add_flag("--mrc-only-paragraph", mc.mrc_only_paragraph, "Reader only, over the whole paragraph");

  PredictArgs pr;
  auto* p = app.add_subcommand("predict", "Write a prediction TSV");
  p->add_option("--ckpt", pr.ckpt, "Checkpoint path")->required();
  p->add_option("--data", pr.data, "Corpus (.jsonl)")->required();
  p->add_option("--out", pr.out, "Output .tsv path")->required();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score predictions against gold");
  e->add_option("--task", ev.task, "1, 2 or violations")
      ->check(CLI::IsMember({"1", "2", "violations"}))
      ->capture_default_str();
  e->add_option("--pred", ev.pred, "Prediction .tsv")->required();
  e->add_option("--gold", ev.gold, "Gold .jsonl or .tsv")->required();
  e->add_option("--json", ev.json_out, "Also write the report as JSON");

  TraceArgs tc;
  auto* c = app.add_subcommand("trace", "Dump per-step predictions and graph attention");
  c->add_option("--ckpt", tc.ckpt, "Checkpoint path")->required();
  c->add_option("--data", tc.data, "Corpus (.jsonl)")->required();
  c->add_option("--id", tc.id, "Process id")->required();
  c->add_option("--out", tc.out, "JSON output; printed after the table if omitted");

  try {
    app.parse(argc, argv);
    if (t->parsed() && !train_config.empty()) apply_config(*t, train_config);
  } catch (const Error& ex) {
    err << "dkg: error: " << ex.what() << "\n";
    return kExitFailure;
  } catch (const CLI::Success& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::ParseError& ex) {
    err << "dkg: error: " << ex.what() << "\n";
    return kExitUsage;
  }

  try {
    if (s->parsed()) cmd_synth(synth, out);
    if (t->parsed()) cmd_train(tr, out, err);
    if (p->parsed()) cmd_predict(pr, out);
    if (e->parsed()) cmd_eval(ev, out);
    if (c->parsed()) cmd_trace(tc, out);
  } catch (const UsageError& ex) {
    err << "dkg: error: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& ex) {
    err << "dkg: error: " << ex.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace dkg
