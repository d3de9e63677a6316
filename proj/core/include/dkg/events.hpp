#pragma once

// Location tables keyed by text, and the create/destroy/move events read off
// them. Both scorers work on these, so gold grids and prediction dumps are
// compared the same way.

#include <string>
#include <vector>

#include "dkg/corpus.hpp"

namespace dkg {

// Lowercased and re-tokenized, with leading "the", "a" and "an" removed.
std::string normalize_location(const std::string& text);

struct LocationCell {
  LocationKind kind = LocationKind::kNowhere;
  std::string text;  // normalized; empty unless kind == kSpan

  static LocationCell nowhere() { return {}; }
  static LocationCell somewhere() { return {LocationKind::kSomewhere, {}}; }
  static LocationCell span(const std::string& raw) { return {LocationKind::kSpan, normalize_location(raw)}; }

  bool exists() const { return kind != LocationKind::kNowhere; }
  friend bool operator==(const LocationCell&, const LocationCell&) = default;
};

std::string to_string(const LocationCell& cell);

// One process: entity names and, per entity, T + 1 cells.
struct StateTable {
  std::string process_id;
  std::vector<std::string> entities;
  std::vector<std::vector<LocationCell>> rows;

  std::size_t steps() const { return rows.empty() ? 0 : rows.front().size(); }
};

StateTable state_table(const ProcessInstance& instance, const LocationGrid& grid);
inline StateTable gold_table(const ProcessInstance& instance) {
  return state_table(instance, instance.gold);
}

struct Move {
  std::size_t step = 0;
  LocationCell from;
  LocationCell to;
  friend bool operator==(const Move&, const Move&) = default;
};

struct EntityEvents {
  std::vector<std::size_t> creations;
  std::vector<std::size_t> destructions;
  std::vector<Move> moves;

  bool empty() const { return creations.empty() && destructions.empty() && moves.empty(); }
  friend bool operator==(const EntityEvents&, const EntityEvents&) = default;
};

EntityEvents derive_events(const std::vector<LocationCell>& row);

// One entry per entity of the table.
std::vector<EntityEvents> derive_events(const StateTable& table);

}  // namespace dkg
