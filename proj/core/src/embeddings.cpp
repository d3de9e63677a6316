#include "dkg/embeddings.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "dkg/error.hpp"

namespace dkg {
namespace {

constexpr std::uint64_t kUnknownSeed = 0x9e3779b97f4a7c15ULL;

std::vector<Real> random_vector(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<Real> dist(-1.0, 1.0);
  std::vector<Real> v(dim);
  for (auto& x : v) x = dist(rng);
  return v;
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t state) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= 1099511628211ULL;
  }
  return state;
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path,
                                    const std::set<std::string>& vocab) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embedding file '" + path.string() + "'");
  EmbeddingTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream row(line);
    std::string word;
    if (!(row >> word)) continue;
    std::vector<Real> values;
    for (Real v; row >> v;) values.push_back(v);
    if (!row.eof()) {
      throw ParseError("embedding line " + std::to_string(lineno) + ": non-numeric value");
    }
    if (values.empty()) {
      throw ParseError("embedding line " + std::to_string(lineno) + ": no values");
    }
    if (table.dim_ == 0) {
      table.dim_ = values.size();
    } else if (values.size() != table.dim_) {
      throw ParseError("embedding line " + std::to_string(lineno) + ": width " +
                       std::to_string(values.size()) + " differs from " + std::to_string(table.dim_));
    }
    if (vocab.count(word)) table.rows_.emplace(word, std::move(values));
  }
  if (table.dim_ == 0) throw ParseError("embedding file '" + path.string() + "' has no rows");
  table.unknown_ = random_vector(table.dim_, kUnknownSeed);
  return table;
}

EmbeddingTable EmbeddingTable::hashed(std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw Error("embedding width must be positive");
  EmbeddingTable table;
  table.dim_ = dim;
  table.hashed_ = true;
  table.seed_ = seed;
  table.unknown_ = random_vector(dim, kUnknownSeed ^ seed);
  return table;
}

bool EmbeddingTable::contains(const std::string& word) const {
  return hashed_ || rows_.count(word) != 0;
}

void EmbeddingTable::lookup(const std::string& word, std::span<Real> out) const {
  if (out.size() != dim_) throw ShapeError("embedding lookup: output width mismatch");
  if (hashed_) {
    const auto v = random_vector(dim_, fnv1a(word) ^ seed_);
    std::copy(v.begin(), v.end(), out.begin());
    return;
  }
  auto it = rows_.find(word);
  const auto& src = it == rows_.end() ? unknown_ : it->second;
  std::copy(src.begin(), src.end(), out.begin());
}

std::vector<Real> EmbeddingTable::lookup(const std::string& word) const {
  std::vector<Real> v(dim_);
  lookup(word, v);
  return v;
}

std::uint64_t EmbeddingTable::vocab_hash() const {
  if (hashed_) return fnv1a("hashed:" + std::to_string(dim_) + ":" + std::to_string(seed_));
  std::vector<std::string> words;
  words.reserve(rows_.size());
  for (const auto& [w, _] : rows_) words.push_back(w);
  std::sort(words.begin(), words.end());
  std::uint64_t h = fnv1a("file:" + std::to_string(dim_));
  for (const auto& w : words) h = fnv1a(w + '\n', h);
  return h;
}

std::set<std::string> corpus_vocabulary(const std::vector<ProcessInstance>& corpus) {
  std::set<std::string> vocab{"where", "is", "located", "?"};
  for (const auto& inst : corpus) {
    vocab.insert(inst.tokens.begin(), inst.tokens.end());
    for (const auto& e : inst.entities) vocab.insert(e.tokens.begin(), e.tokens.end());
  }
  return vocab;
}

double oov_rate(const EmbeddingTable& table, const std::vector<ProcessInstance>& corpus) {
  const auto vocab = corpus_vocabulary(corpus);
  if (vocab.empty()) return 0.0;
  std::size_t missing = 0;
  for (const auto& w : vocab) missing += table.contains(w) ? 0 : 1;
  return static_cast<double>(missing) / static_cast<double>(vocab.size());
}

}  // namespace dkg
