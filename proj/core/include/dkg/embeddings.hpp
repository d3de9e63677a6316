#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dkg/corpus.hpp"
#include "dkg/tensor.hpp"

namespace dkg {

// Frozen word-vector table. Out-of-vocabulary words share one fixed unknown
// vector. A hashed table instead derives a deterministic pseudo-random vector
// for every word and has no unknown words.
class EmbeddingTable {
 public:
  // Reads "word v1 ... vk" rows, keeping only words in `vocab`.
  static EmbeddingTable load(const std::filesystem::path& path, const std::set<std::string>& vocab);
  static EmbeddingTable hashed(std::size_t dim, std::uint64_t seed);

  std::size_t dim() const { return dim_; }
  bool is_hashed() const { return hashed_; }
  std::uint64_t hash_seed() const { return seed_; }
  std::size_t size() const { return rows_.size(); }
  bool contains(const std::string& word) const;

  // Writes the vector for `word` into `out` (dim() entries).
  void lookup(const std::string& word, std::span<Real> out) const;
  std::vector<Real> lookup(const std::string& word) const;
  std::span<const Real> unknown() const { return unknown_; }

  // FNV-1a over the sorted vocabulary (file tables) or the hashing seed.
  std::uint64_t vocab_hash() const;

 private:
  std::size_t dim_ = 0;
  bool hashed_ = false;
  std::uint64_t seed_ = 0;
  std::unordered_map<std::string, std::vector<Real>> rows_;
  std::vector<Real> unknown_;
};

std::set<std::string> corpus_vocabulary(const std::vector<ProcessInstance>& corpus);

// Fraction of distinct corpus words (paragraph and entity tokens) that the
// table does not contain.
double oov_rate(const EmbeddingTable& table, const std::vector<ProcessInstance>& corpus);

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t state = 1469598103934665603ULL);

}  // namespace dkg
