#include <algorithm>
#include <array>
#include <cstdio>
#include <optional>
#include <random>

#include "dkg/corpus.hpp"
#include "dkg/tensor.hpp"

namespace dkg {
namespace {

constexpr std::array kEntityPool = {
    "water", "oxygen", "carbon dioxide", "sugar",  "seed",  "rock",  "sediment", "magma",
    "ice",   "gas",    "nutrients",      "minerals", "pollen", "blood", "sand",   "energy"};

constexpr std::array kLocationPool = {"soil",  "root",   "stem",  "cloud",       "river",
                                      "ocean", "lake",   "air",   "lungs",       "heart",
                                      "valley", "cave",  "ground", "upper layer", "plant cell"};

constexpr std::array kMoveVerbs = {"moves to", "travels to", "is carried to"};
constexpr std::array kDestroyVerbs = {"is consumed", "breaks down", "disappears"};

enum class Status { kNotYet, kExists, kGone };

struct Tracked {
  std::string name;
  Status status = Status::kNotYet;
  LocationState state;
  std::string location_text;  // empty unless state is a span
};

class Paragraph {
 public:
  // Appends the tokenized words as one sentence. A word of the form "@L:x"
  // inserts location x and its paragraph offsets are returned.
  TokenSpan add(const std::vector<std::string>& words) {
    TokenSpan loc{};
    std::vector<std::string> sentence;
    for (const auto& w : words) {
      if (w.rfind("@L:", 0) == 0) {
        const auto toks = tokenize(w.substr(3));
        loc = {offset_ + sentence.size(), offset_ + sentence.size() + toks.size() - 1};
        sentence.insert(sentence.end(), toks.begin(), toks.end());
      } else {
        const auto toks = tokenize(w);
        sentence.insert(sentence.end(), toks.begin(), toks.end());
      }
    }
    offset_ += sentence.size();
    sentences_.push_back(std::move(sentence));
    return loc;
  }

  const std::vector<std::vector<std::string>>& sentences() const { return sentences_; }

 private:
  std::size_t offset_ = 0;
  std::vector<std::vector<std::string>> sentences_;
};

template <typename Seq>
auto pick(const Seq& seq, Rng& rng) {
  std::uniform_int_distribution<std::size_t> d(0, seq.size() - 1);
  return seq[d(rng)];
}

std::size_t uniform(std::size_t lo, std::size_t hi, Rng& rng) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

std::optional<ProcessInstance> try_generate(const std::string& id, const SynthOptions& opt,
                                            Rng& rng) {
  const std::size_t steps = uniform(opt.min_sentences, opt.max_sentences, rng);
  const std::size_t n = std::min(uniform(opt.min_entities, opt.max_entities, rng), kEntityPool.size());

  std::vector<std::size_t> order(kEntityPool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Tracked> ents(n);
  std::bernoulli_distribution exists_initially(0.6);
  for (std::size_t i = 0; i < n; ++i) {
    ents[i].name = kEntityPool[order[i]];
    ents[i].status = exists_initially(rng) ? Status::kExists : Status::kNotYet;
  }
  if (std::none_of(ents.begin(), ents.end(), [](const Tracked& e) { return e.status == Status::kExists; })) {
    ents[0].status = Status::kExists;
  }
  for (auto& e : ents) {
    e.state = e.status == Status::kExists ? LocationState::somewhere() : LocationState::nowhere();
  }

  LocationGrid grid(n, steps + 1);
  for (std::size_t i = 0; i < n; ++i) grid.at(i, 0) = ents[i].state;

  Paragraph para;
  for (std::size_t t = 1; t <= steps; ++t) {
    std::vector<std::size_t> existing, unborn;
    for (std::size_t i = 0; i < n; ++i) {
      if (ents[i].status == Status::kExists) existing.push_back(i);
      if (ents[i].status == Status::kNotYet) unborn.push_back(i);
    }
    std::vector<std::size_t> unlocated;
    for (auto i : existing) {
      if (!ents[i].state.is_span()) unlocated.push_back(i);
    }

    enum Action { kLocate, kMove, kCreate, kDestroy, kConvert, kIdle };
    std::vector<std::pair<Action, double>> options;
    if (t == 1 && !unlocated.empty()) options.emplace_back(kLocate, 3.0);
    if (!existing.empty()) options.emplace_back(kMove, 4.0);
    if (!unborn.empty()) options.emplace_back(kCreate, 2.0);
    if (!existing.empty()) options.emplace_back(kDestroy, 1.0);
    if (!existing.empty() && !unborn.empty()) options.emplace_back(kConvert, 1.5);
    options.emplace_back(kIdle, 0.5);
    std::vector<double> weights;
    for (const auto& o : options) weights.push_back(o.second);
    std::discrete_distribution<std::size_t> choose(weights.begin(), weights.end());
    const Action action = options[choose(rng)].first;

    switch (action) {
      case kLocate: {
        const auto i = pick(unlocated, rng);
        const std::string place = pick(kLocationPool, rng);
        const TokenSpan loc = para.add({"the", ents[i].name, "is in the", "@L:" + place, "."});
        ents[i].state = LocationState::at(loc.start, loc.end);
        ents[i].location_text = place;
        grid.at(i, 0) = ents[i].state;
        break;
      }
      case kMove: {
        const auto i = pick(existing, rng);
        std::string target;
        do {
          target = pick(kLocationPool, rng);
        } while (target == ents[i].location_text);
        const TokenSpan loc = para.add({"the", ents[i].name, pick(kMoveVerbs, rng), "the", "@L:" + target, "."});
        ents[i].state = LocationState::at(loc.start, loc.end);
        ents[i].location_text = target;
        break;
      }
      case kCreate: {
        const auto i = pick(unborn, rng);
        if (std::bernoulli_distribution(0.5)(rng)) {
          const std::string place = pick(kLocationPool, rng);
          const TokenSpan loc = para.add({"the", ents[i].name, "forms in the", "@L:" + place, "."});
          ents[i].state = LocationState::at(loc.start, loc.end);
          ents[i].location_text = place;
        } else {
          para.add({"the", ents[i].name, "is produced", "."});
          ents[i].state = LocationState::somewhere();
          ents[i].location_text.clear();
        }
        ents[i].status = Status::kExists;
        break;
      }
      case kDestroy: {
        const auto i = pick(existing, rng);
        para.add({"the", ents[i].name, pick(kDestroyVerbs, rng), "."});
        ents[i].state = LocationState::nowhere();
        ents[i].location_text.clear();
        ents[i].status = Status::kGone;
        break;
      }
      case kConvert: {
        const auto src = pick(existing, rng);
        const auto dst = pick(unborn, rng);
        para.add({"the", ents[src].name, "turns into the", ents[dst].name, "."});
        ents[dst].state = ents[src].state;
        ents[dst].location_text = ents[src].location_text;
        ents[dst].status = Status::kExists;
        ents[src].state = LocationState::nowhere();
        ents[src].location_text.clear();
        ents[src].status = Status::kGone;
        break;
      }
      case kIdle: {
        para.add({"the", std::string("@L:") + pick(kLocationPool, rng), "is warm", "."});
        break;
      }
    }
    for (std::size_t i = 0; i < n; ++i) grid.at(i, t) = ents[i].state;
  }

  std::vector<std::string> names;
  for (const auto& e : ents) names.push_back(e.name);
  ProcessInstance inst = make_instance(id, para.sentences(), names, std::move(grid));
  for (const auto& e : inst.entities) {
    if (e.mentions.empty()) return std::nullopt;
  }
  return inst;
}

}  // namespace

std::vector<ProcessInstance> synth_corpus(std::uint64_t seed, std::size_t count,
                                          const SynthOptions& options) {
  Rng rng(seed);
  std::vector<ProcessInstance> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    char id[48];
    std::snprintf(id, sizeof(id), "synth-%llu-%05zu", static_cast<unsigned long long>(seed), k);
    for (;;) {
      if (auto inst = try_generate(id, options, rng)) {
        out.push_back(std::move(*inst));
        break;
      }
    }
  }
  return out;
}

}  // namespace dkg
