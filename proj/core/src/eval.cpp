#include "dkg/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "dkg/error.hpp"
#include "json.hpp"

namespace dkg {
namespace {

using nlohmann::json;

constexpr std::array<const char*, kTask1Questions> kQuestionNames = {
    "is_created",    "is_destroyed",    "is_moved",   "when_created", "when_destroyed",
    "when_moved",    "where_created",   "where_destroyed", "moved_from", "moved_to"};
constexpr std::array<std::size_t, kTask1Questions> kQuestionCategory = {0, 0, 0, 1, 1, 1, 2, 2, 2, 2};

double percent(std::size_t num, std::size_t den) {
  return den == 0 ? 100.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

struct AlignedRow {
  const std::vector<LocationCell>* pred;
  const std::vector<LocationCell>* gold;
  const std::string* entity;
  const std::string* process;
};

// Pairs every gold row with the prediction row of the same process and entity.
std::vector<AlignedRow> align(const std::vector<StateTable>& preds, const std::vector<StateTable>& golds) {
  std::map<std::string, const StateTable*> by_id;
  for (const auto& p : preds) {
    if (!by_id.emplace(p.process_id, &p).second) {
      throw ValidationError("predictions contain process '" + p.process_id + "' twice");
    }
  }
  if (preds.size() != golds.size()) {
    throw ValidationError("predictions cover " + std::to_string(preds.size()) + " processes, gold has " +
                          std::to_string(golds.size()));
  }
  std::vector<AlignedRow> out;
  for (const auto& g : golds) {
    auto it = by_id.find(g.process_id);
    if (it == by_id.end()) throw ValidationError("no predictions for process '" + g.process_id + "'");
    const StateTable& p = *it->second;
    if (p.entities.size() != g.entities.size()) {
      throw ValidationError("process '" + g.process_id + "': entity lists differ");
    }
    std::map<std::string, std::size_t> rows;
    for (std::size_t i = 0; i < p.entities.size(); ++i) rows.emplace(p.entities[i], i);
    for (std::size_t i = 0; i < g.entities.size(); ++i) {
      auto r = rows.find(g.entities[i]);
      if (r == rows.end()) {
        throw ValidationError("process '" + g.process_id + "': no prediction for entity '" +
                              g.entities[i] + "'");
      }
      if (p.rows[r->second].size() != g.rows[i].size()) {
        throw ValidationError("process '" + g.process_id + "': entity '" + g.entities[i] +
                              "' has " + std::to_string(p.rows[r->second].size()) +
                              " predicted steps, gold has " + std::to_string(g.rows[i].size()));
      }
      out.push_back({&p.rows[r->second], &g.rows[i], &g.entities[i], &g.process_id});
    }
  }
  return out;
}

std::vector<LocationCell> cells_at(const std::vector<LocationCell>& row,
                                   const std::vector<std::size_t>& steps, std::size_t back) {
  std::vector<LocationCell> out;
  for (auto t : steps) out.push_back(row[t - back]);
  return out;
}

std::vector<LocationCell> move_ends(const std::vector<Move>& moves, bool to) {
  std::vector<LocationCell> out;
  for (const auto& m : moves) out.push_back(to ? m.to : m.from);
  return out;
}

std::vector<std::size_t> move_steps(const std::vector<Move>& moves) {
  std::vector<std::size_t> out;
  for (const auto& m : moves) out.push_back(m.step);
  return out;
}

void tally(TupleScore& score, const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  std::map<std::string, long> counts;
  for (const auto& g : gold) ++counts[g];
  for (const auto& p : pred) {
    auto it = counts.find(p);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++score.matched;
    }
  }
  score.predicted += pred.size();
  score.gold += gold.size();
}

json tuple_json(const TupleScore& s) {
  return {{"predicted", s.predicted}, {"gold", s.gold},       {"matched", s.matched},
          {"precision", s.precision()}, {"recall", s.recall()}, {"f1", s.f1()}};
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

}  // namespace

double CategoryScore::score() const { return percent(correct, asked); }

Task1Report score_task1(const std::vector<StateTable>& preds, const std::vector<StateTable>& golds) {
  Task1Report r;
  for (std::size_t q = 0; q < kTask1Questions; ++q) r.questions[q].name = kQuestionNames[q];
  auto ask = [&](std::size_t q, bool correct) {
    ++r.questions[q].asked;
    if (correct) ++r.questions[q].correct;
  };
  for (const auto& row : align(preds, golds)) {
    const EntityEvents g = derive_events(*row.gold);
    const EntityEvents p = derive_events(*row.pred);
    ask(0, g.creations.empty() == p.creations.empty());
    ask(1, g.destructions.empty() == p.destructions.empty());
    ask(2, g.moves.empty() == p.moves.empty());
    if (!g.creations.empty()) {
      ask(3, p.creations == g.creations);
      ask(6, cells_at(*row.pred, p.creations, 0) == cells_at(*row.gold, g.creations, 0));
    }
    if (!g.destructions.empty()) {
      ask(4, p.destructions == g.destructions);
      ask(7, cells_at(*row.pred, p.destructions, 1) == cells_at(*row.gold, g.destructions, 1));
    }
    if (!g.moves.empty()) {
      ask(5, move_steps(p.moves) == move_steps(g.moves));
      ask(8, move_ends(p.moves, false) == move_ends(g.moves, false));
      ask(9, move_ends(p.moves, true) == move_ends(g.moves, true));
    }
  }
  std::size_t asked = 0, correct = 0;
  for (std::size_t q = 0; q < kTask1Questions; ++q) {
    auto& cat = r.categories[kQuestionCategory[q]];
    cat.asked += r.questions[q].asked;
    cat.correct += r.questions[q].correct;
    asked += r.questions[q].asked;
    correct += r.questions[q].correct;
  }
  r.micro = percent(correct, asked);
  double sum = 0;
  std::size_t counted = 0;
  for (const auto& cat : r.categories) {
    if (cat.asked == 0) continue;
    sum += cat.score();
    ++counted;
  }
  r.macro = counted == 0 ? 100.0 : sum / static_cast<double>(counted);
  return r;
}

double TupleScore::precision() const {
  if (predicted == 0) return gold == 0 ? 100.0 : 0.0;
  return percent(matched, predicted);
}

double TupleScore::recall() const { return percent(matched, gold); }

double TupleScore::f1() const {
  const double p = precision(), r = recall();
  return p + r == 0 ? 0.0 : 2 * p * r / (p + r);
}

ProcessTuples extract_tuples(const StateTable& table) {
  ProcessTuples out;
  const auto events = derive_events(table);
  const std::string& pid = table.process_id;
  std::map<std::size_t, std::pair<std::vector<std::string>, std::vector<std::string>>> by_step;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const auto& name = table.entities[i];
    if (row.empty()) continue;
    if (row.front().exists() && !row.back().exists()) out.inputs.push_back(pid + "|" + name);
    if (row.back().exists() && !events[i].creations.empty()) out.outputs.push_back(pid + "|" + name);
    for (auto t : events[i].creations) by_step[t].first.push_back(name);
    for (auto t : events[i].destructions) by_step[t].second.push_back(name);
    for (const auto& m : events[i].moves) {
      out.moves.push_back(pid + "|" + name + "|" + std::to_string(m.step) + "|" + to_string(m.from) +
                          "|" + to_string(m.to));
    }
  }
  for (auto& [step, sides] : by_step) {
    auto& [created, destroyed] = sides;
    if (created.empty() || destroyed.empty()) continue;
    std::sort(created.begin(), created.end());
    std::sort(destroyed.begin(), destroyed.end());
    std::string key = pid + "|";
    for (const auto& c : created) key += c + ",";
    key += "|";
    for (const auto& d : destroyed) key += d + ",";
    key += "|" + std::to_string(step);
    out.conversions.push_back(std::move(key));
  }
  return out;
}

Task2Report score_task2(const std::vector<StateTable>& preds, const std::vector<StateTable>& golds) {
  align(preds, golds);  // validates ids and entity lists
  std::map<std::string, const StateTable*> by_id;
  for (const auto& p : preds) by_id.emplace(p.process_id, &p);
  Task2Report r;
  for (const auto& g : golds) {
    const ProcessTuples gt = extract_tuples(g);
    const ProcessTuples pt = extract_tuples(*by_id.at(g.process_id));
    tally(r.inputs, pt.inputs, gt.inputs);
    tally(r.outputs, pt.outputs, gt.outputs);
    tally(r.conversions, pt.conversions, gt.conversions);
    tally(r.moves, pt.moves, gt.moves);
  }
  for (const TupleScore* s : {&r.inputs, &r.outputs, &r.conversions, &r.moves}) {
    r.total.predicted += s->predicted;
    r.total.gold += s->gold;
    r.total.matched += s->matched;
  }
  return r;
}

double violation_proportion(std::size_t violations, std::size_t predictions) {
  return predictions == 0 ? 0.0 : 100.0 * static_cast<double>(violations) / static_cast<double>(predictions);
}

double ViolationReport::proportion() const { return violation_proportion(violations, predictions); }

ViolationReport count_violations(const std::vector<StateTable>& preds,
                                 const std::vector<ProcessInstance>& instances) {
  std::vector<StateTable> golds;
  golds.reserve(instances.size());
  for (const auto& inst : instances) golds.push_back(gold_table(inst));
  align(preds, golds);
  std::map<std::string, const StateTable*> by_id;
  for (const auto& p : preds) by_id.emplace(p.process_id, &p);

  ViolationReport r;
  for (const auto& inst : instances) {
    const StateTable& table = *by_id.at(inst.id);
    for (std::size_t k = 0; k < table.entities.size(); ++k) {
      std::size_t i = 0;
      while (inst.entities[i].name != table.entities[k]) ++i;
      // Step (1-based sentence) of the first mention; 0 when never mentioned.
      std::size_t first_mention = 0;
      for (const auto& m : inst.entities[i].mentions) {
        const std::size_t s = inst.sentence_of(m.start) + 1;
        if (first_mention == 0 || s < first_mention) first_mention = s;
      }
      const EntityEvents ev = derive_events(table.rows[k]);
      auto judge = [&](std::size_t t, bool needs_existing, bool needs_absent) {
        ++r.predictions;
        const bool existed = inst.gold.at(i, t - 1).exists();
        const std::array<bool, 3> broken = {needs_existing && !existed, needs_absent && existed,
                                            first_mention == 0 || first_mention > t};
        bool any = false;
        for (std::size_t rule = 0; rule < 3; ++rule) {
          if (broken[rule]) {
            ++r.by_rule[rule];
            any = true;
          }
        }
        if (any) ++r.violations;
      };
      for (auto t : ev.creations) judge(t, false, true);
      for (auto t : ev.destructions) judge(t, true, false);
      for (const auto& m : ev.moves) judge(m.step, true, false);
    }
  }
  return r;
}

std::string to_json(const Task1Report& r) {
  json q = json::array();
  for (const auto& s : r.questions) {
    q.push_back({{"question", s.name}, {"asked", s.asked}, {"correct", s.correct},
                 {"accuracy", percent(s.correct, s.asked)}});
  }
  return json{{"task", 1},           {"cat1", r.cat(0)},   {"cat2", r.cat(1)},
              {"cat3", r.cat(2)},     {"macro", r.macro},   {"micro", r.micro},
              {"questions", q}}
      .dump(2);
}

std::string to_json(const Task2Report& r) {
  return json{{"task", 2},
              {"precision", r.total.precision()},
              {"recall", r.total.recall()},
              {"f1", r.total.f1()},
              {"inputs", tuple_json(r.inputs)},
              {"outputs", tuple_json(r.outputs)},
              {"conversions", tuple_json(r.conversions)},
              {"moves", tuple_json(r.moves)}}
      .dump(2);
}

std::string to_json(const ViolationReport& r) {
  return json{{"task", "violations"},
              {"state_change_predictions", r.predictions},
              {"violations", r.violations},
              {"violation_proportion", r.proportion()},
              {"by_rule", r.by_rule}}
      .dump(2);
}

std::string to_text(const Task1Report& r) {
  std::ostringstream os;
  os << "Task 1\n";
  os << "  cat1   " << fmt(r.cat(0)) << "\n  cat2   " << fmt(r.cat(1)) << "\n  cat3   "
     << fmt(r.cat(2)) << "\n  macro  " << fmt(r.macro) << "\n  micro  " << fmt(r.micro) << "\n";
  for (const auto& q : r.questions) {
    os << "    " << q.name << std::string(18 - q.name.size(), ' ') << q.correct << "/" << q.asked << "\n";
  }
  return os.str();
}

std::string to_text(const Task2Report& r) {
  std::ostringstream os;
  os << "Task 2\n  family       pred  gold  match\n";
  auto line = [&](const char* name, const TupleScore& s) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "  %-11s %5zu %5zu %6zu\n", name, s.predicted, s.gold, s.matched);
    os << buf;
  };
  line("inputs", r.inputs);
  line("outputs", r.outputs);
  line("conversions", r.conversions);
  line("moves", r.moves);
  os << "  precision  " << fmt(r.total.precision()) << "\n  recall     " << fmt(r.total.recall())
     << "\n  f1         " << fmt(r.total.f1()) << "\n";
  return os.str();
}

std::string to_text(const ViolationReport& r) {
  std::ostringstream os;
  os << "State change predictions  " << r.predictions << "\nViolations                " << r.violations
     << "\nViolation proportion      " << fmt(r.proportion()) << "%\n";
  return os.str();
}

}  // namespace dkg
