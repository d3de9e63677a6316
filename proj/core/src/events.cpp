#include "dkg/events.hpp"

#include "dkg/error.hpp"

namespace dkg {

std::string normalize_location(const std::string& text) {
  auto tokens = tokenize(text);
  std::size_t skip = 0;
  while (tokens.size() - skip > 1 &&
         (tokens[skip] == "the" || tokens[skip] == "a" || tokens[skip] == "an")) {
    ++skip;
  }
  tokens.erase(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(skip));
  return join_tokens(tokens);
}

std::string to_string(const LocationCell& cell) {
  switch (cell.kind) {
    case LocationKind::kNowhere: return "-";
    case LocationKind::kSomewhere: return "?";
    case LocationKind::kSpan: return cell.text;
  }
  return "-";
}

StateTable state_table(const ProcessInstance& inst, const LocationGrid& grid) {
  if (grid.entities() != inst.num_entities() || grid.steps() != inst.num_sentences() + 1) {
    throw ValidationError("state_table: grid does not fit instance '" + inst.id + "'");
  }
  StateTable table;
  table.process_id = inst.id;
  for (std::size_t i = 0; i < inst.num_entities(); ++i) {
    table.entities.push_back(inst.entities[i].name);
    std::vector<LocationCell> row;
    for (std::size_t t = 0; t < grid.steps(); ++t) {
      const auto& s = grid.at(i, t);
      switch (s.kind) {
        case LocationKind::kNowhere: row.push_back(LocationCell::nowhere()); break;
        case LocationKind::kSomewhere: row.push_back(LocationCell::somewhere()); break;
        case LocationKind::kSpan: row.push_back(LocationCell::span(inst.span_text(s.span))); break;
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

EntityEvents derive_events(const std::vector<LocationCell>& row) {
  EntityEvents ev;
  for (std::size_t t = 1; t < row.size(); ++t) {
    const auto& before = row[t - 1];
    const auto& after = row[t];
    if (!before.exists() && after.exists()) {
      ev.creations.push_back(t);
    } else if (before.exists() && !after.exists()) {
      ev.destructions.push_back(t);
    } else if (before.exists() && after.exists() && before != after) {
      ev.moves.push_back({t, before, after});
    }
  }
  return ev;
}

std::vector<EntityEvents> derive_events(const StateTable& table) {
  std::vector<EntityEvents> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) out.push_back(derive_events(row));
  return out;
}

}  // namespace dkg
