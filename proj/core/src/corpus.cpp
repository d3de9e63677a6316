#include "dkg/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>

#include "dkg/error.hpp"
#include "json.hpp"

namespace dkg {

using nlohmann::json;

const char* to_string(LocationKind kind) {
  switch (kind) {
    case LocationKind::kNowhere: return "NOWHERE";
    case LocationKind::kSomewhere: return "SOMEWHERE";
    case LocationKind::kSpan: return "SPAN";
  }
  return "?";
}

std::size_t ProcessInstance::sentence_of(std::size_t token) const {
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    if (token >= sentences[s].begin && token < sentences[s].end) return s;
  }
  throw ValidationError("token " + std::to_string(token) + " outside every sentence of " + id);
}

std::size_t ProcessInstance::prefix_length(std::size_t t) const {
  if (t == 0) return 0;
  if (t > sentences.size()) {
    throw ValidationError("prefix " + std::to_string(t) + " exceeds " +
                          std::to_string(sentences.size()) + " sentences");
  }
  return sentences[t - 1].end;
}

std::string ProcessInstance::span_text(const TokenSpan& span) const {
  if (span.start > span.end || span.end >= tokens.size()) {
    throw ValidationError("span " + std::to_string(span.start) + ":" + std::to_string(span.end) +
                          " outside paragraph " + id);
  }
  return join_tokens(std::span<const std::string>(tokens).subspan(span.start, span.length()));
}

std::vector<std::string> ProcessInstance::sentence_tokens(std::size_t t) const {
  const auto& r = sentences.at(t);
  return {tokens.begin() + r.begin, tokens.begin() + r.end};
}

void validate(const ProcessInstance& inst) {
  const std::string where = "instance '" + inst.id + "': ";
  if (inst.sentences.empty()) throw ValidationError(where + "no sentences");
  if (inst.entities.empty()) throw ValidationError(where + "no entities");
  std::size_t expected = 0;
  for (const auto& s : inst.sentences) {
    if (s.begin != expected || s.end <= s.begin) {
      throw ValidationError(where + "sentence ranges do not partition the tokens");
    }
    expected = s.end;
  }
  if (expected != inst.tokens.size()) {
    throw ValidationError(where + "sentence ranges cover " + std::to_string(expected) + " of " +
                          std::to_string(inst.tokens.size()) + " tokens");
  }
  for (const auto& e : inst.entities) {
    if (e.tokens.empty()) throw ValidationError(where + "empty entity name");
    for (const auto& m : e.mentions) {
      if (m.start > m.end || m.end >= inst.tokens.size()) {
        throw ValidationError(where + "mention of '" + e.name + "' outside the paragraph");
      }
    }
  }
  if (inst.gold.entities() != inst.entities.size() ||
      inst.gold.steps() != inst.sentences.size() + 1) {
    throw ValidationError(where + "grid is " + std::to_string(inst.gold.entities()) + "x" +
                          std::to_string(inst.gold.steps()) + ", expected " +
                          std::to_string(inst.entities.size()) + "x" +
                          std::to_string(inst.sentences.size() + 1));
  }
  for (std::size_t i = 0; i < inst.gold.entities(); ++i) {
    for (std::size_t t = 0; t < inst.gold.steps(); ++t) {
      const auto& s = inst.gold.at(i, t);
      if (s.is_span() && (s.span.start > s.span.end || s.span.end >= inst.tokens.size())) {
        throw ValidationError(where + "grid span outside the paragraph");
      }
    }
  }
}

ProcessInstance make_instance(std::string id, const std::vector<std::vector<std::string>>& sentences,
                              const std::vector<std::string>& entity_names, LocationGrid gold) {
  ProcessInstance inst;
  inst.id = std::move(id);
  for (const auto& s : sentences) {
    const std::size_t begin = inst.tokens.size();
    for (const auto& tok : s) {
      std::string lowered = tok;
      std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      inst.tokens.push_back(std::move(lowered));
    }
    inst.sentences.push_back({begin, inst.tokens.size()});
  }
  for (const auto& name : entity_names) {
    Entity e;
    e.name = name;
    e.tokens = tokenize(name);
    e.mentions = find_entity_mentions(inst.tokens, name);
    inst.entities.push_back(std::move(e));
  }
  if (gold.steps() == 0) gold = LocationGrid(entity_names.size(), sentences.size() + 1);
  inst.gold = std::move(gold);
  return inst;
}

std::string encode_state(const ProcessInstance& inst, const LocationState& state) {
  switch (state.kind) {
    case LocationKind::kNowhere: return "-";
    case LocationKind::kSomewhere: return "?";
    case LocationKind::kSpan:
      return inst.span_text(state.span) + "@" + std::to_string(state.span.start) + ":" +
             std::to_string(state.span.end);
  }
  return "-";
}

LocationState decode_state(const std::string& text) {
  if (text == "-") return LocationState::nowhere();
  if (text == "?") return LocationState::somewhere();
  const auto at = text.rfind('@');
  const auto colon = text.rfind(':');
  if (at == std::string::npos || colon == std::string::npos || colon < at) {
    throw ParseError("malformed location state '" + text + "'");
  }
  try {
    std::size_t used = 0;
    const std::string a = text.substr(at + 1, colon - at - 1);
    const std::string b = text.substr(colon + 1);
    const unsigned long start = std::stoul(a, &used);
    if (used != a.size()) throw std::invalid_argument(a);
    const unsigned long end = std::stoul(b, &used);
    if (used != b.size()) throw std::invalid_argument(b);
    if (end < start) throw ParseError("span end precedes start in '" + text + "'");
    return LocationState::at(start, end);
  } catch (const std::logic_error&) {
    throw ParseError("malformed span offsets in '" + text + "'");
  }
}

ProcessInstance parse_instance(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  std::string id = "<unknown>";
  try {
    id = j.at("id").get<std::string>();
    auto sentences = j.at("sentences").get<std::vector<std::vector<std::string>>>();
    auto names = j.at("entities").get<std::vector<std::string>>();
    auto rows = j.at("grid").get<std::vector<std::vector<std::string>>>();
    if (rows.size() != names.size()) {
      throw ValidationError("record '" + id + "': grid has " + std::to_string(rows.size()) +
                            " rows for " + std::to_string(names.size()) + " entities");
    }
    LocationGrid grid(names.size(), sentences.size() + 1);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != sentences.size() + 1) {
        throw ValidationError("record '" + id + "': grid row " + std::to_string(i) + " has " +
                              std::to_string(rows[i].size()) + " states, expected " +
                              std::to_string(sentences.size() + 1));
      }
      for (std::size_t t = 0; t < rows[i].size(); ++t) grid.at(i, t) = decode_state(rows[i][t]);
    }
    ProcessInstance inst = make_instance(id, sentences, names, std::move(grid));
    validate(inst);
    // Span text, when present, must agree with the offsets.
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t t = 0; t < rows[i].size(); ++t) {
        const auto& s = inst.gold.at(i, t);
        if (!s.is_span()) continue;
        const std::string text = rows[i][t].substr(0, rows[i][t].rfind('@'));
        if (!text.empty() && join_tokens(tokenize(text)) != inst.span_text(s.span)) {
          throw ValidationError("record '" + id + "': span text '" + text +
                                "' does not match tokens '" + inst.span_text(s.span) + "'");
        }
      }
    }
    return inst;
  } catch (const json::exception& e) {
    throw ParseError("record '" + id + "': " + e.what());
  } catch (const ParseError& e) {
    throw ParseError("record '" + id + "': " + e.what());
  }
}

std::string serialize_instance(const ProcessInstance& inst) {
  json j;
  j["id"] = inst.id;
  json sentences = json::array();
  for (std::size_t t = 0; t < inst.sentences.size(); ++t) sentences.push_back(inst.sentence_tokens(t));
  j["sentences"] = std::move(sentences);
  json names = json::array();
  for (const auto& e : inst.entities) names.push_back(e.name);
  j["entities"] = std::move(names);
  json grid = json::array();
  for (std::size_t i = 0; i < inst.gold.entities(); ++i) {
    json row = json::array();
    for (std::size_t t = 0; t < inst.gold.steps(); ++t) row.push_back(encode_state(inst, inst.gold.at(i, t)));
    grid.push_back(std::move(row));
  }
  j["grid"] = std::move(grid);
  return j.dump();
}

std::vector<ProcessInstance> parse_corpus(std::istream& in) {
  std::vector<ProcessInstance> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_instance(line));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
    for (const auto& e : out.back().entities) {
      if (e.mentions.empty()) {
        std::clog << "warning: entity '" << e.name << "' of '" << out.back().id
                  << "' has no mention; using the name-embedding fallback\n";
      }
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ProcessInstance& a, const ProcessInstance& b) { return a.id < b.id; });
  return out;
}

std::vector<ProcessInstance> parse_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus '" + path.string() + "'");
  return parse_corpus(in);
}

void write_corpus(std::ostream& out, const std::vector<ProcessInstance>& corpus) {
  for (const auto& inst : corpus) out << serialize_instance(inst) << '\n';
}

void write_corpus(const std::filesystem::path& path, const std::vector<ProcessInstance>& corpus) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  write_corpus(out, corpus);
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace dkg
