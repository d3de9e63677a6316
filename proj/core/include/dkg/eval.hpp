#pragma once

// Sentence-level (Task 1) and document-level (Task 2) scorers plus the
// commonsense violation counter. Inputs are aligned by process id and by
// entity name; ordering does not matter.

#include <array>
#include <string>
#include <vector>

#include "dkg/events.hpp"

namespace dkg {

struct QuestionScore {
  std::string name;
  std::size_t asked = 0;
  std::size_t correct = 0;
};

struct CategoryScore {
  std::size_t asked = 0;
  std::size_t correct = 0;
  // Percentage; 100 when nothing was asked.
  double score() const;
};

inline constexpr std::size_t kTask1Questions = 10;

struct Task1Report {
  std::array<QuestionScore, kTask1Questions> questions;
  std::array<CategoryScore, 3> categories;
  double macro = 0;  // mean over categories that asked at least one question
  double micro = 0;  // correct / asked over all questions

  double cat(std::size_t k) const { return categories.at(k).score(); }
};

Task1Report score_task1(const std::vector<StateTable>& predictions,
                        const std::vector<StateTable>& golds);

struct TupleScore {
  std::size_t predicted = 0;
  std::size_t gold = 0;
  std::size_t matched = 0;

  double precision() const;
  double recall() const;
  double f1() const;
};

struct Task2Report {
  TupleScore inputs;
  TupleScore outputs;
  TupleScore conversions;
  TupleScore moves;
  TupleScore total;
};

// Document-level tuples of one process, each rendered as a string key.
struct ProcessTuples {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<std::string> conversions;
  std::vector<std::string> moves;
};

ProcessTuples extract_tuples(const StateTable& table);

Task2Report score_task2(const std::vector<StateTable>& predictions,
                        const std::vector<StateTable>& golds);

struct ViolationReport {
  std::size_t predictions = 0;  // create, destroy and move events
  std::size_t violations = 0;   // events breaking at least one rule
  std::array<std::size_t, 3> by_rule{};

  double proportion() const;
};

double violation_proportion(std::size_t violations, std::size_t predictions);

// Existence is judged on the gold grid of the matching instance; mentions
// come from the instance.
ViolationReport count_violations(const std::vector<StateTable>& predictions,
                                 const std::vector<ProcessInstance>& instances);

std::string to_json(const Task1Report& report);
std::string to_json(const Task2Report& report);
std::string to_json(const ViolationReport& report);
std::string to_text(const Task1Report& report);
std::string to_text(const Task2Report& report);
std::string to_text(const ViolationReport& report);

}  // namespace dkg
