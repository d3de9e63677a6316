#include "dkg/prediction_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "dkg/checkpoint.hpp"
#include "dkg/error.hpp"
#include "json.hpp"

namespace dkg {
namespace {

using nlohmann::json;

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  while (true) {
    const auto tab = line.find('\t', begin);
    out.push_back(line.substr(begin, tab == std::string::npos ? std::string::npos : tab - begin));
    if (tab == std::string::npos) break;
    begin = tab + 1;
  }
  return out;
}

json matrix_json(const Tensor& m) {
  json rows = json::array();
  if (!m.defined()) return rows;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m.at(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string cell_label(const ProcessInstance& inst, const StatePrediction& p) {
  switch (p.kind) {
    case LocationKind::kNowhere: return "-";
    case LocationKind::kSomewhere: return "?";
    case LocationKind::kSpan: return inst.span_text(p.span);
  }
  return "-";
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

}  // namespace

std::string tsv_header() { return "process_id\tstep\tentity\tclass\tspan_text"; }

void write_tables_tsv(std::ostream& out, const std::vector<StateTable>& tables) {
  out << tsv_header() << "\n";
  for (const auto& table : tables) {
    for (std::size_t i = 0; i < table.entities.size(); ++i) {
      if (table.entities[i].find('\t') != std::string::npos) {
        throw ValidationError("entity name contains a tab: '" + table.entities[i] + "'");
      }
      for (std::size_t t = 0; t < table.rows[i].size(); ++t) {
        const auto& cell = table.rows[i][t];
        out << table.process_id << '\t' << t << '\t' << table.entities[i] << '\t' << to_string(cell.kind)
            << '\t' << cell.text << '\n';
      }
    }
  }
}

void write_tables_tsv(const std::filesystem::path& path, const std::vector<StateTable>& tables) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  write_tables_tsv(out, tables);
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

std::vector<StateTable> read_tables_tsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != tsv_header()) {
    throw ParseError("prediction file must start with the header '" + tsv_header() + "'");
  }
  std::vector<StateTable> tables;
  std::map<std::string, std::size_t> by_id;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (fields.size() != 5) throw ParseError(where + "expected 5 tab-separated columns");
    auto [it, fresh] = by_id.emplace(fields[0], tables.size());
    if (fresh) tables.push_back({fields[0], {}, {}});
    StateTable& table = tables[it->second];
    std::size_t step = 0;
    try {
      std::size_t used = 0;
      step = std::stoul(fields[1], &used);
      if (used != fields[1].size()) throw std::invalid_argument(fields[1]);
    } catch (const std::logic_error&) {
      throw ParseError(where + "bad step '" + fields[1] + "'");
    }
    auto e = std::find(table.entities.begin(), table.entities.end(), fields[2]);
    if (e == table.entities.end()) {
      table.entities.push_back(fields[2]);
      table.rows.emplace_back();
      e = table.entities.end() - 1;
    }
    auto& row = table.rows[static_cast<std::size_t>(e - table.entities.begin())];
    if (step != row.size()) {
      throw ParseError(where + "step " + std::to_string(step) + " of '" + fields[2] + "' out of order");
    }
    if (fields[3] == "NOWHERE") {
      row.push_back(LocationCell::nowhere());
    } else if (fields[3] == "SOMEWHERE") {
      row.push_back(LocationCell::somewhere());
    } else if (fields[3] == "SPAN") {
      if (normalize_location(fields[4]).empty()) throw ParseError(where + "SPAN row without text");
      row.push_back(LocationCell::span(fields[4]));
    } else {
      throw ParseError(where + "unknown class '" + fields[3] + "'");
    }
  }
  for (const auto& table : tables) {
    for (const auto& row : table.rows) {
      if (row.size() != table.rows.front().size()) {
        throw ValidationError("process '" + table.process_id + "': entities have different step counts");
      }
    }
  }
  return tables;
}

std::vector<StateTable> read_tables_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  try {
    return read_tables_tsv(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::vector<StateTable> read_tables(const std::filesystem::path& path) {
  if (path.extension() == ".tsv") return read_tables_tsv(path);
  std::vector<StateTable> out;
  for (const auto& inst : parse_corpus(path)) out.push_back(gold_table(inst));
  return out;
}

EmbeddingTable make_embeddings(const EmbeddingSource& source,
                               const std::vector<ProcessInstance>& corpus) {
  if (source.hashed) return EmbeddingTable::hashed(source.dim, source.seed);
  EmbeddingTable table = EmbeddingTable::load(source.path, corpus_vocabulary(corpus));
  if (table.dim() != source.dim) {
    throw ShapeError("embedding file '" + source.path + "' has width " + std::to_string(table.dim()) +
                     ", expected " + std::to_string(source.dim));
  }
  return table;
}

std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint) {
  return std::filesystem::path(checkpoint.string() + ".json");
}

std::string sidecar_json(const CheckpointMeta& meta) {
  const ModelConfig& m = meta.train.model;
  json j;
  j["format_version"] = kCheckpointVersion;
  j["model"] = {{"embed_dim", m.embed_dim},
                {"hidden", m.hidden},
                {"encoder_layers", m.encoder_layers},
                {"node_dim", m.node_dim},
                {"graph_layers", m.graph_layers},
                {"max_span_length", m.max_span_length},
                {"rnn_dropout", m.rnn_dropout},
                {"mlp_dropout", m.mlp_dropout},
                {"no_coref_across", m.no_coref_across},
                {"no_coref_within", m.no_coref_within},
                {"lstm_graph_unit", m.lstm_graph_unit},
                {"mrc_only_prefix", m.mrc_only_prefix},
                {"mrc_only_paragraph", m.mrc_only_paragraph},
                {"variant", m.variant()}};
  j["train"] = {{"learning_rate", meta.train.learning_rate},
                {"batch_size", meta.train.batch_size},
                {"epochs", meta.train.epochs},
                {"seed", meta.train.seed},
                {"patience", meta.train.patience},
                {"target_micro", meta.train.target_micro}};
  j["embeddings"] = {{"kind", meta.embeddings.hashed ? "hashed" : "file"},
                     {"dim", meta.embeddings.dim},
                     {"seed", meta.embeddings.seed},
                     {"path", meta.embeddings.path}};
  j["vocab_hash"] = hex(meta.vocab_hash);
  return j.dump(2);
}

CheckpointMeta parse_sidecar(const std::string& text) {
  try {
    const json j = json::parse(text);
    const auto version = j.at("format_version").get<std::uint32_t>();
    if (version != kCheckpointVersion) {
      throw Error("checkpoint sidecar version mismatch: file has version " + std::to_string(version) +
                  ", this build reads version " + std::to_string(kCheckpointVersion));
    }
    CheckpointMeta meta;
    ModelConfig& m = meta.train.model;
    const json& jm = j.at("model");
    jm.at("embed_dim").get_to(m.embed_dim);
    jm.at("hidden").get_to(m.hidden);
    jm.at("encoder_layers").get_to(m.encoder_layers);
    jm.at("node_dim").get_to(m.node_dim);
    jm.at("graph_layers").get_to(m.graph_layers);
    jm.at("max_span_length").get_to(m.max_span_length);
    jm.at("rnn_dropout").get_to(m.rnn_dropout);
    jm.at("mlp_dropout").get_to(m.mlp_dropout);
    jm.at("no_coref_across").get_to(m.no_coref_across);
    jm.at("no_coref_within").get_to(m.no_coref_within);
    jm.at("lstm_graph_unit").get_to(m.lstm_graph_unit);
    jm.at("mrc_only_prefix").get_to(m.mrc_only_prefix);
    jm.at("mrc_only_paragraph").get_to(m.mrc_only_paragraph);
    const json& jt = j.at("train");
    jt.at("learning_rate").get_to(meta.train.learning_rate);
    jt.at("batch_size").get_to(meta.train.batch_size);
    jt.at("epochs").get_to(meta.train.epochs);
    jt.at("seed").get_to(meta.train.seed);
    jt.at("patience").get_to(meta.train.patience);
    jt.at("target_micro").get_to(meta.train.target_micro);
    const json& je = j.at("embeddings");
    meta.embeddings.hashed = je.at("kind").get<std::string>() == "hashed";
    je.at("dim").get_to(meta.embeddings.dim);
    je.at("seed").get_to(meta.embeddings.seed);
    je.at("path").get_to(meta.embeddings.path);
    meta.vocab_hash = std::stoull(j.at("vocab_hash").get<std::string>(), nullptr, 16);
    return meta;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed checkpoint sidecar: ") + e.what());
  }
}

void write_sidecar(const std::filesystem::path& checkpoint, const CheckpointMeta& meta) {
  const auto path = sidecar_path(checkpoint);
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << sidecar_json(meta) << "\n";
}

CheckpointMeta read_sidecar(const std::filesystem::path& checkpoint) {
  const auto path = sidecar_path(checkpoint);
  std::ifstream in(path);
  if (!in) throw Error("checkpoint sidecar '" + path.string() + "' not found");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_sidecar(buf.str());
}

Model load_model(const std::filesystem::path& checkpoint, CheckpointMeta* meta_out) {
  CheckpointMeta meta = read_sidecar(checkpoint);
  Model model(meta.train.model, load_params(checkpoint));
  if (meta_out) *meta_out = std::move(meta);
  return model;
}

void save_model(const std::filesystem::path& checkpoint, const ParamSet& params,
                const CheckpointMeta& meta) {
  save_params(checkpoint, params);
  write_sidecar(checkpoint, meta);
}

std::string trace_json(const ProcessInstance& inst, const ProcessOutput& output) {
  json steps = json::array();
  for (const auto& st : output.trace) {
    json ents = json::array();
    for (std::size_t i = 0; i < st.entities.size(); ++i) {
      const auto& es = st.entities[i];
      ents.push_back({{"entity", inst.entities[i].name},
                      {"class", to_string(es.prediction.kind)},
                      {"probs", es.prediction.probs},
                      {"location", cell_label(inst, es.prediction)},
                      {"span", {es.prediction.span.start, es.prediction.span.end}},
                      {"span_text", es.span_text}});
    }
    json rec = {{"step", st.step}, {"entities", ents}};
    rec["sentence"] = st.step == 0 ? std::string() : join_tokens(inst.sentence_tokens(st.step - 1));
    if (st.attention.defined()) rec["attention"] = matrix_json(st.attention);
    if (st.gate.defined()) {
      json g = json::array();
      for (Real v : st.gate.values()) g.push_back(v);
      rec["gate"] = g;
    }
    if (st.adjacency.defined()) rec["adjacency"] = matrix_json(st.adjacency);
    steps.push_back(std::move(rec));
  }
  json names = json::array();
  for (const auto& e : inst.entities) names.push_back(e.name);
  return json{{"id", inst.id}, {"entities", names}, {"steps", steps}}.dump(2);
}

std::string trace_text(const ProcessInstance& inst, const ProcessOutput& output) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"step", "sentence"};
  for (const auto& e : inst.entities) header.push_back(e.name);
  rows.push_back(header);
  for (const auto& st : output.trace) {
    std::vector<std::string> row{std::to_string(st.step),
                                 st.step == 0 ? "(before)" : join_tokens(inst.sentence_tokens(st.step - 1))};
    for (const auto& es : st.entities) row.push_back(cell_label(inst, es.prediction));
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (auto& row : rows) {
    if (row[1].size() > 48) row[1] = row[1].substr(0, 45) + "...";
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream os;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      os << row[c];
      if (c + 1 < row.size()) os << std::string(width[c] - row[c].size() + 2, ' ');
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace dkg
