#pragma once

// Annotated procedural paragraphs and their gold location grids.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace dkg {

// Lowercased whitespace split; every punctuation character becomes its own
// token.
std::vector<std::string> tokenize(const std::string& text);

std::string join_tokens(std::span<const std::string> tokens);

// Token offsets, both ends inclusive.
struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start + 1; }
  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

// Half-open token range of one sentence.
struct SentenceRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  friend bool operator==(const SentenceRange&, const SentenceRange&) = default;
};

enum class LocationKind { kNowhere, kSomewhere, kSpan };

const char* to_string(LocationKind kind);

struct LocationState {
  LocationKind kind = LocationKind::kNowhere;
  TokenSpan span;  // meaningful only for kSpan

  static LocationState nowhere() { return {LocationKind::kNowhere, {}}; }
  static LocationState somewhere() { return {LocationKind::kSomewhere, {}}; }
  static LocationState at(std::size_t start, std::size_t end) {
    return {LocationKind::kSpan, {start, end}};
  }

  bool is_span() const { return kind == LocationKind::kSpan; }
  bool exists() const { return kind != LocationKind::kNowhere; }

  friend bool operator==(const LocationState& a, const LocationState& b) {
    return a.kind == b.kind && (a.kind != LocationKind::kSpan || a.span == b.span);
  }
};

// N entities x (T + 1) steps; column 0 is the state before the first sentence.
class LocationGrid {
 public:
  LocationGrid() = default;
  LocationGrid(std::size_t entities, std::size_t steps)
      : steps_(steps), cells_(entities * steps, LocationState::nowhere()) {}

  std::size_t entities() const { return steps_ == 0 ? 0 : cells_.size() / steps_; }
  std::size_t steps() const { return steps_; }

  LocationState& at(std::size_t entity, std::size_t step) { return cells_[entity * steps_ + step]; }
  const LocationState& at(std::size_t entity, std::size_t step) const {
    return cells_[entity * steps_ + step];
  }

  friend bool operator==(const LocationGrid&, const LocationGrid&) = default;

 private:
  std::size_t steps_ = 0;
  std::vector<LocationState> cells_;
};

struct Entity {
  std::string name;
  std::vector<std::string> tokens;
  std::vector<TokenSpan> mentions;
};

struct ProcessInstance {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<SentenceRange> sentences;
  std::vector<Entity> entities;
  LocationGrid gold;

  std::size_t num_sentences() const { return sentences.size(); }
  std::size_t num_entities() const { return entities.size(); }
  // Index of the sentence containing `token`.
  std::size_t sentence_of(std::size_t token) const;
  // Tokens covered by sentences 1..t.
  std::size_t prefix_length(std::size_t t) const;
  std::string span_text(const TokenSpan& span) const;
  std::vector<std::string> sentence_tokens(std::size_t t) const;
};

// Non-overlapping, left-to-right, case-insensitive matches of the tokenized
// entity name.
std::vector<TokenSpan> find_entity_mentions(std::span<const std::string> tokens,
                                            const std::string& entity_name);

// Throws ValidationError when sentence ranges, mentions, or the grid do not
// fit the instance.
void validate(const ProcessInstance& instance);

// Builds an instance from sentences and entity names; mentions are located
// by string matching. `gold` may be empty (grid filled with NOWHERE).
ProcessInstance make_instance(std::string id, const std::vector<std::vector<std::string>>& sentences,
                              const std::vector<std::string>& entity_names, LocationGrid gold = {});

// Canonical JSONL: {"id", "sentences", "entities", "grid"}; a state is "-"
// (nowhere), "?" (somewhere) or "<text>@<start>:<end>".
ProcessInstance parse_instance(const std::string& json_line);
std::string serialize_instance(const ProcessInstance& instance);

std::vector<ProcessInstance> parse_corpus(std::istream& in);
std::vector<ProcessInstance> parse_corpus(const std::filesystem::path& path);
void write_corpus(std::ostream& out, const std::vector<ProcessInstance>& corpus);
void write_corpus(const std::filesystem::path& path, const std::vector<ProcessInstance>& corpus);

std::string encode_state(const ProcessInstance& instance, const LocationState& state);
LocationState decode_state(const std::string& text);

// Deterministic templated processes with internally consistent gold grids.
struct SynthOptions {
  std::size_t min_sentences = 3;
  std::size_t max_sentences = 6;
  std::size_t min_entities = 2;
  std::size_t max_entities = 4;
};

std::vector<ProcessInstance> synth_corpus(std::uint64_t seed, std::size_t count,
                                          const SynthOptions& options = {});

}  // namespace dkg
