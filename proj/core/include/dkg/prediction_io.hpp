#pragma once

// File formats around the model: prediction TSV dumps, the JSON sidecar that
// accompanies a parameter checkpoint, and per-step trace records.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dkg/events.hpp"
#include "dkg/model.hpp"
#include "dkg/train.hpp"

namespace dkg {

// Columns: process_id, step, entity, class, span_text. One row per cell,
// grouped by process in the given order.
std::string tsv_header();
void write_tables_tsv(std::ostream& out, const std::vector<StateTable>& tables);
void write_tables_tsv(const std::filesystem::path& path, const std::vector<StateTable>& tables);
std::vector<StateTable> read_tables_tsv(std::istream& in);
std::vector<StateTable> read_tables_tsv(const std::filesystem::path& path);

// Gold tables from a .jsonl corpus or a .tsv dump, chosen by extension.
std::vector<StateTable> read_tables(const std::filesystem::path& path);

struct EmbeddingSource {
  bool hashed = true;
  std::size_t dim = 50;
  std::uint64_t seed = 0;
  std::string path;  // embedding file when not hashed
};

// Hashed tables ignore the corpus; file tables keep the corpus vocabulary.
EmbeddingTable make_embeddings(const EmbeddingSource& source,
                               const std::vector<ProcessInstance>& corpus);

struct CheckpointMeta {
  TrainConfig train;
  EmbeddingSource embeddings;
  std::uint64_t vocab_hash = 0;
};

std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint);
std::string sidecar_json(const CheckpointMeta& meta);
CheckpointMeta parse_sidecar(const std::string& text);
void write_sidecar(const std::filesystem::path& checkpoint, const CheckpointMeta& meta);
CheckpointMeta read_sidecar(const std::filesystem::path& checkpoint);

// Loads the parameters and sidecar and rebuilds the model.
Model load_model(const std::filesystem::path& checkpoint, CheckpointMeta* meta = nullptr);
void save_model(const std::filesystem::path& checkpoint, const ParamSet& params,
                const CheckpointMeta& meta);

// One JSON document per process: initial state plus one record per sentence.
std::string trace_json(const ProcessInstance& instance, const ProcessOutput& output);
// Entity-by-step table of predicted locations.
std::string trace_text(const ProcessInstance& instance, const ProcessOutput& output);

}  // namespace dkg
