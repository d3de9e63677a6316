#include "suites.hpp"

#include <algorithm>
#include <sstream>

#include "dkg/encoder.hpp"
#include "dkg/graph.hpp"
#include "dkg/nn.hpp"
#include "dkg/reader.hpp"

namespace dkg::testing {
namespace {

std::vector<Tensor> param_tensors(const ParamSet& ps) {
  std::vector<Tensor> out;
  for (const auto& entry : ps) out.push_back(entry.second);
  return out;
}

std::vector<Tensor> join(std::vector<Tensor> a, const std::vector<Tensor>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

GradCase unary(const std::string& name, Tensor (*op)(const Tensor&), Real offset = 0.0) {
  return {name, [op, offset] {
            Rng rng(11);
            Tensor x = random_tensor({3, 4}, rng);
            if (offset != 0.0) {
              for (auto& v : x.mutable_values()) v += v >= 0 ? offset : -offset;
            }
            return gradcheck([&] { return weighted_sum(op(x)); }, {x});
          }};
}

ReaderConfig small_reader() {
  ReaderConfig c;
  c.embed_dim = 5;
  c.context_dim = 6;
  c.node_dim = 4;
  c.max_span_length = 3;
  return c;
}

GraphConfig small_graph() {
  GraphConfig g;
  g.node_dim = 4;
  g.layers = 2;
  return g;
}

double row_sum_deviation(const Tensor& probs, bool& nonnegative) {
  double worst = 0;
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    double s = 0;
    for (std::size_t c = 0; c < probs.cols(); ++c) {
      const double v = probs.at(r, c);
      if (v < 0) nonnegative = false;
      s += v;
    }
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

Tensor exp_of(const Tensor& log_probs) {
  std::vector<Real> v(log_probs.values().begin(), log_probs.values().end());
  for (auto& x : v) x = std::exp(x);
  return Tensor::from_values(log_probs.shape(), std::move(v));
}

LocationCell parse_cell(const std::string& s) {
  if (s == "-") return LocationCell::nowhere();
  if (s == "?") return LocationCell::somewhere();
  std::string words = s;
  std::replace(words.begin(), words.end(), '_', ' ');
  return LocationCell::span(words);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

}  // namespace

ModelConfig tiny_config() {
  ModelConfig c;
  c.embed_dim = 6;
  c.hidden = 4;
  c.encoder_layers = 2;
  c.node_dim = 6;
  c.graph_layers = 2;
  c.max_span_length = 4;
  return c;
}

ProcessInstance toy_instance() {
  LocationGrid gold(2, 3);
  // water: in the soil, then absorbed (destroyed); sugar: created in the leaf.
  gold.at(0, 0) = LocationState::at(4, 4);
  gold.at(0, 1) = LocationState::at(4, 4);
  gold.at(0, 2) = LocationState::nowhere();
  gold.at(1, 0) = LocationState::nowhere();
  gold.at(1, 1) = LocationState::nowhere();
  gold.at(1, 2) = LocationState::at(12, 12);
  return make_instance("toy", {{"water", "sits", "in", "the", "soil", "."},
                               {"the", "water", "becomes", "sugar", "in", "the", "leaf", "."}},
                       {"water", "sugar"}, gold);
}

std::vector<GradCase> gradient_suite() {
  std::vector<GradCase> cases;
  cases.push_back({"matmul", [] {
                     Rng rng(1);
                     Tensor a = random_tensor({3, 4}, rng), b = random_tensor({4, 2}, rng);
                     return gradcheck([&] { return weighted_sum(matmul(a, b)); }, {a, b});
                   }});
  cases.push_back({"transpose", [] {
                     Rng rng(2);
                     Tensor a = random_tensor({3, 4}, rng);
                     return gradcheck([&] { return weighted_sum(transpose(a)); }, {a});
                   }});
  cases.push_back({"add_broadcast", [] {
                     Rng rng(3);
                     Tensor a = random_tensor({3, 4}, rng), b = random_tensor({1, 4}, rng);
                     return gradcheck([&] { return weighted_sum(add(a, b)); }, {a, b});
                   }});
  cases.push_back({"sub_broadcast", [] {
                     Rng rng(4);
                     Tensor a = random_tensor({3, 4}, rng), b = random_tensor({3, 1}, rng);
                     return gradcheck([&] { return weighted_sum(sub(a, b)); }, {a, b});
                   }});
  cases.push_back({"mul_broadcast", [] {
                     Rng rng(5);
                     Tensor a = random_tensor({3, 4}, rng), b = random_tensor({3, 1}, rng);
                     return gradcheck([&] { return weighted_sum(mul(a, b)); }, {a, b});
                   }});
  cases.push_back({"scale", [] {
                     Rng rng(6);
                     Tensor a = random_tensor({2, 3}, rng);
                     return gradcheck([&] { return weighted_sum(scale(a, -1.7)); }, {a});
                   }});
  cases.push_back({"add_scalar", [] {
                     Rng rng(7);
                     Tensor a = random_tensor({2, 3}, rng);
                     return gradcheck([&] { return weighted_sum(add_scalar(a, 0.3)); }, {a});
                   }});
  cases.push_back(unary("sigmoid", &sigmoid));
  cases.push_back(unary("tanh", &tanh));
  cases.push_back(unary("relu", &relu, 0.05));
  cases.push_back({"concat_cols", [] {
                     Rng rng(8);
                     Tensor a = random_tensor({2, 3}, rng), b = random_tensor({2, 2}, rng);
                     return gradcheck([&] { return weighted_sum(concat_cols({a, b, a})); }, {a, b});
                   }});
  cases.push_back({"concat_rows", [] {
                     Rng rng(9);
                     Tensor a = random_tensor({2, 3}, rng), b = random_tensor({1, 3}, rng);
                     return gradcheck([&] { return weighted_sum(concat_rows({a, b})); }, {a, b});
                   }});
  cases.push_back({"slice_cols", [] {
                     Rng rng(10);
                     Tensor a = random_tensor({3, 5}, rng);
                     return gradcheck([&] { return weighted_sum(slice_cols(a, 1, 4)); }, {a});
                   }});
  cases.push_back({"slice_rows", [] {
                     Rng rng(12);
                     Tensor a = random_tensor({4, 3}, rng);
                     return gradcheck([&] { return weighted_sum(slice_rows(a, 1, 3)); }, {a});
                   }});
  cases.push_back({"gather_rows", [] {
                     Rng rng(13);
                     Tensor a = random_tensor({3, 2}, rng), b = random_tensor({3, 2}, rng);
                     return gradcheck([&] { return weighted_sum(gather_rows({a, b, a}, 1)); }, {a, b});
                   }});
  cases.push_back({"softmax_rows", [] {
                     Rng rng(14);
                     Tensor a = random_tensor({3, 5}, rng, 2.0);
                     return gradcheck([&] { return weighted_sum(softmax_rows(a)); }, {a});
                   }});
  cases.push_back({"log_softmax_rows", [] {
                     Rng rng(15);
                     Tensor a = random_tensor({3, 5}, rng, 2.0);
                     return gradcheck([&] { return weighted_sum(log_softmax_rows(a)); }, {a});
                   }});
  cases.push_back({"pick", [] {
                     Rng rng(16);
                     Tensor a = random_tensor({3, 4}, rng);
                     return gradcheck([&] { return add(pick(a, 2, 1), scale(pick(a, 0, 3), 2.0)); }, {a});
                   }});
  cases.push_back({"sum", [] {
                     Rng rng(17);
                     Tensor a = random_tensor({3, 4}, rng);
                     return gradcheck([&] { return sum(mul(a, a)); }, {a});
                   }});
  cases.push_back({"add_n", [] {
                     Rng rng(18);
                     Tensor a = random_tensor({2, 3}, rng), b = random_tensor({2, 3}, rng);
                     return gradcheck([&] { return weighted_sum(add_n({a, b, a})); }, {a, b});
                   }});
  cases.push_back({"dropout", [] {
                     Rng rng(19);
                     Tensor a = random_tensor({4, 5}, rng);
                     return gradcheck(
                         [&] {
                           Rng mask(99);
                           return weighted_sum(dropout(a, 0.4, true, mask));
                         },
                         {a});
                   }});
  cases.push_back({"linear", [] {
                     Rng rng(20);
                     ParamSet ps;
                     Linear l = Linear::create(ps, "l", 4, 3, rng);
                     Tensor x = random_tensor({2, 4}, rng);
                     return gradcheck([&] { return weighted_sum(l(x)); }, join(param_tensors(ps), {x}));
                   }});
  cases.push_back({"lstm_cell", [] {
                     Rng rng(21);
                     ParamSet ps;
                     LstmParams p = LstmParams::create(ps, "cell", 3, 4, rng);
                     Tensor x = random_tensor({2, 3}, rng), h = random_tensor({2, 4}, rng),
                            c = random_tensor({2, 4}, rng);
                     return gradcheck(
                         [&] {
                           LstmState s = lstm_cell(x, {h, c}, p);
                           return add(weighted_sum(s.h, 1), weighted_sum(s.c, 2));
                         },
                         join(param_tensors(ps), {x, h, c}));
                   }});
  cases.push_back({"bilstm_encode", [] {
                     Rng rng(22);
                     ParamSet ps;
                     BiLstmParams p = BiLstmParams::create(ps, "bi", 3, 2, 2, rng);
                     std::vector<Tensor> xs;
                     for (int j = 0; j < 4; ++j) xs.push_back(random_tensor({2, 3}, rng));
                     return gradcheck(
                         [&] {
                           auto out = bilstm_encode(xs, p, 0.0, ForwardContext{});
                           return weighted_sum(concat_rows(out));
                         },
                         join(param_tensors(ps), xs));
                   }});
  cases.push_back({"span_projection", [] {
                     Rng rng(23);
                     ParamSet ps;
                     Linear proj = Linear::create(ps, "p", 6, 4, rng);
                     Tensor tokens = random_tensor({5, 3}, rng);
                     return gradcheck([&] { return weighted_sum(span_projection(tokens, {1, 3}, proj)); },
                                      join(param_tensors(ps), {tokens}));
                   }});
  cases.push_back({"entity_init", [] {
                     Rng rng(24);
                     ParamSet ps;
                     Linear proj = Linear::create(ps, "p", 6, 4, rng);
                     Tensor tokens = random_tensor({6, 3}, rng);
                     const std::vector<TokenSpan> mentions{{0, 0}, {2, 3}, {5, 5}};
                     return gradcheck([&] { return weighted_sum(*entity_init(tokens, mentions, proj)); },
                                      join(param_tensors(ps), {tokens}));
                   }});
  cases.push_back({"coref_across", [] {
                     Rng rng(25);
                     ParamSet ps;
                     Linear gate = Linear::create(ps, "gate", 8, 1, rng);
                     Tensor psi = random_tensor({3, 4}, rng), prev = random_tensor({3, 4}, rng);
                     return gradcheck(
                         [&] {
                           auto r = coref_across(psi, prev, gate);
                           return add(weighted_sum(r.locations), weighted_sum(r.attention, 3));
                         },
                         join(param_tensors(ps), {psi, prev}));
                   }});
  cases.push_back({"coref_within", [] {
                     Rng rng(26);
                     Tensor cand = random_tensor({3, 4}, rng);
                     return gradcheck(
                         [&] {
                           auto r = coref_within(cand);
                           return add(weighted_sum(r.locations), weighted_sum(r.adjacency, 3));
                         },
                         {cand});
                   }});
  cases.push_back({"update_layer", [] {
                     Rng rng(27);
                     ParamSet ps;
                     LstmParams cell = LstmParams::create(ps, "u", 8, 4, rng);
                     Tensor e = random_tensor({3, 4}, rng), lam = random_tensor({3, 4}, rng),
                            h = random_tensor({3, 4}, rng), c = random_tensor({3, 4}, rng);
                     Tensor u = softmax_rows(random_tensor({3, 3}, rng));
                     u = u.detach();
                     return gradcheck(
                         [&] {
                           auto r = update_layer(e, lam, {h, c}, u, cell, small_graph(), ForwardContext{});
                           return add(add(weighted_sum(r.entities), weighted_sum(r.locations, 3)),
                                      weighted_sum(r.carry.c, 5));
                         },
                         join(param_tensors(ps), {e, lam, h, c, u}));
                   }});
  cases.push_back({"graph_step", [] {
                     Rng rng(28);
                     ParamSet ps;
                     const GraphConfig cfg = small_graph();
                     GraphParams gp = GraphParams::create(ps, cfg, rng);
                     Tensor nu = random_tensor({3, 4}, rng), psi = random_tensor({3, 4}, rng),
                            psi2 = random_tensor({3, 4}, rng);
                     return gradcheck(
                         [&] {
                           GraphState g = init_graph(nu, gp, cfg);
                           g = graph_step(g, psi, gp, cfg, ForwardContext{});
                           g = graph_step(g, psi2, gp, cfg, ForwardContext{});
                           return add(weighted_sum(g.entities), weighted_sum(g.locations, 3));
                         },
                         join(param_tensors(ps), {nu, psi, psi2}));
                   }});
  cases.push_back({"lstm_unit_step", [] {
                     Rng rng(29);
                     ParamSet ps;
                     const GraphConfig cfg = small_graph();
                     LstmUnitParams p = LstmUnitParams::create(ps, cfg, rng);
                     Tensor e = random_tensor({2, 4}, rng), psi = random_tensor({2, 4}, rng);
                     return gradcheck(
                         [&] {
                           GraphState g;
                           g.entities = e;
                           g = lstm_unit_step(g, psi, p, cfg, ForwardContext{});
                           return weighted_sum(g.entities);
                         },
                         join(param_tensors(ps), {e, psi}));
                   }});
  cases.push_back({"reader_question", [] {
                     Rng rng(30);
                     ParamSet ps;
                     const ReaderConfig cfg = small_reader();
                     ReaderParams rp = ReaderParams::create(ps, cfg, rng);
                     const EmbeddingTable table = EmbeddingTable::hashed(cfg.embed_dim, 3);
                     const auto q = make_question("water");
                     std::vector<Tensor> inputs{rp.question_attn};
                     for (const auto& l : rp.question.layers) {
                       for (const auto* p : {&l.forward, &l.backward}) {
                         inputs.push_back(p->weight);
                         inputs.push_back(p->bias);
                       }
                     }
                     return gradcheck(
                         [&] {
                           auto enc = encode_question(q, table, rp, cfg, ForwardContext{});
                           return add(weighted_sum(enc.vector), weighted_sum(enc.weights, 2));
                         },
                         inputs);
                   }});
  cases.push_back({"reader_heads", [] {
                     Rng rng(31);
                     ParamSet ps;
                     const ReaderConfig cfg = small_reader();
                     ReaderParams rp = ReaderParams::create(ps, cfg, rng);
                     Tensor tokens = random_tensor({5, cfg.context_dim}, rng);
                     Tensor q = random_tensor({1, cfg.node_dim}, rng), e = random_tensor({1, cfg.node_dim}, rng);
                     std::vector<Tensor> inputs{tokens, q, e};
                     for (const Tensor& t : {rp.condition1.weight, rp.condition1.bias, rp.condition2.weight,
                                             rp.condition2.bias, rp.start_bilinear, rp.end_bilinear,
                                             rp.pool_bilinear, rp.classify1.weight, rp.classify1.bias,
                                             rp.classify2.weight, rp.classify2.bias}) {
                       inputs.push_back(t);
                     }
                     return gradcheck(
                         [&] {
                           Tensor cond = condition_on_entity(q, e, rp, cfg, ForwardContext{});
                           SpanScores s = score_spans(tokens, cond, rp);
                           PrefixSummary sum_ = summarize_prefix(tokens, cond, rp);
                           Tensor cls = classify_state(e, sum_.vector, rp, cfg, ForwardContext{});
                           return add_n({weighted_sum(s.start_log_probs, 1), weighted_sum(s.end_log_probs, 2),
                                         weighted_sum(sum_.weights, 3), weighted_sum(cls, 4)});
                         },
                         inputs);
                   }});
  cases.push_back({"model_loss", [] {
                     ModelConfig cfg = tiny_config();
                     cfg.embed_dim = 3;
                     cfg.hidden = 2;
                     cfg.node_dim = 2;
                     cfg.encoder_layers = 1;
                     cfg.graph_layers = 1;
                     Model model(cfg, 5);
                     const ProcessInstance inst = toy_instance();
                     const EmbeddingTable table = EmbeddingTable::hashed(cfg.embed_dim, 1);
                     return gradcheck(
                         [&] { return model.run(inst, table, {true, true, false}, ForwardContext{}).loss; },
                         param_tensors(model.params()));
                   }});
  return cases;
}

std::vector<NormalizationResult> normalization_suite(std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> dim(1, 9);
  std::uniform_real_distribution<Real> mag(0.1, 8.0);
  NoGradGuard guard;

  NormalizationResult softmax{"softmax_rows"}, spans{"span_scores"}, attention{"coref_across_attention"},
      within{"coref_within_rows"}, classes{"classifier_probs"}, question{"question_pooling"},
      summary{"prefix_summary_pooling"};

  ParamSet ps;
  const ReaderConfig rcfg = small_reader();
  ReaderParams rp = ReaderParams::create(ps, rcfg, rng);
  Linear gate = Linear::create(ps, "gate", 2 * rcfg.node_dim, 1, rng);
  const EmbeddingTable table = EmbeddingTable::hashed(rcfg.embed_dim, seed);
  const std::vector<std::string> words{"water", "soil", "leaf", "root", "the", "sugar", "gas", "air"};

  auto record = [](NormalizationResult& r, const Tensor& probs) {
    r.max_deviation = std::max(r.max_deviation, row_sum_deviation(probs, r.nonnegative));
    r.distributions += probs.rows();
  };

  for (std::size_t s = 0; s < samples; ++s) {
    const Real m = mag(rng);
    record(softmax, softmax_rows(random_tensor({dim(rng), dim(rng)}, rng, 10 * m)));

    const std::size_t len = dim(rng) + 1;
    Tensor tokens = random_tensor({len, rcfg.context_dim}, rng, m);
    Tensor q = random_tensor({1, rcfg.node_dim}, rng, m), e = random_tensor({1, rcfg.node_dim}, rng, m);
    Tensor cond = condition_on_entity(q, e, rp, rcfg, ForwardContext{});
    SpanScores sc = score_spans(tokens, cond, rp);
    record(spans, exp_of(sc.start_log_probs));
    record(spans, exp_of(sc.end_log_probs));
    PrefixSummary sm = summarize_prefix(tokens, cond, rp);
    record(summary, sm.weights);
    record(classes, exp_of(classify_state(e, sm.vector, rp, rcfg, ForwardContext{})));

    const std::size_t n = dim(rng);
    Tensor psi = random_tensor({n, rcfg.node_dim}, rng, m), prev = random_tensor({n, rcfg.node_dim}, rng, m);
    auto across = coref_across(psi, prev, gate);
    record(attention, across.attention);
    record(within, coref_within(across.locations).adjacency);

    std::vector<std::string> qw{"where", "is"};
    for (std::size_t k = 0; k < 1 + s % 3; ++k) qw.push_back(words[(s + k) % words.size()]);
    qw.push_back("located");
    qw.push_back("?");
    record(question, encode_question(qw, table, rp, rcfg, ForwardContext{}).weights);
  }
  return {softmax, spans, attention, within, classes, question, summary};
}

std::vector<AnalyticResult> analytic_suite() {
  std::vector<AnalyticResult> out;
  Rng rng(41);
  NoGradGuard guard;
  auto same = [](const Tensor& a, const Tensor& b) {
    return a.shape() == b.shape() && std::equal(a.values().begin(), a.values().end(), b.values().begin());
  };

  {
    // Zero-weight cell: gates 0.5, candidate 0.
    LstmParams zero{Tensor::zeros({7, 16}), Tensor::zeros({1, 16})};
    Tensor x = random_tensor({2, 3}, rng), h = random_tensor({2, 4}, rng), c = random_tensor({2, 4}, rng);
    LstmState s = lstm_cell(x, {h, c}, zero);
    bool ok = true;
    for (std::size_t k = 0; k < c.size(); ++k) {
      const Real c_next = 0.5 * c.values()[k];
      ok = ok && s.c.values()[k] == c_next && s.h.values()[k] == 0.5 * std::tanh(c_next);
    }
    out.push_back({"zero_weight_lstm_cell", ok});
  }
  {
    const GraphConfig cfg = small_graph();
    LstmParams zero{Tensor::zeros({12, 16}), Tensor::zeros({1, 16})};
    Tensor e = random_tensor({3, 4}, rng), lam = random_tensor({3, 4}, rng);
    Tensor u = softmax_rows(random_tensor({3, 3}, rng));
    auto r = update_layer(e, lam, LstmState::zeros(3, 4), u, zero, cfg, ForwardContext{});
    out.push_back({"zero_weight_update_residual_entities", same(r.entities, e)});
    out.push_back({"zero_weight_update_pooled_locations", same(r.locations, matmul(u, lam))});
  }
  {
    ParamSet ps;
    Linear gate = Linear::create(ps, "gate", 8, 1, rng);
    Tensor psi = random_tensor({1, 4}, rng), prev = random_tensor({1, 4}, rng);
    auto r = coref_across(psi, prev, gate);
    out.push_back({"single_node_attention_is_one", r.attention.item() == 1.0});
    // With g forced to zero the output is psi' itself.
    Linear closed{Tensor::zeros({8, 1}), Tensor::from_values({1, 1}, {-800.0})};
    out.push_back({"single_node_attended_equals_previous", same(coref_across(psi, prev, closed).locations, prev)});
    auto w = coref_within(psi);
    out.push_back({"single_node_within_identity", same(w.locations, psi) && w.adjacency.item() == 1.0});
  }
  {
    Linear open{Tensor::zeros({8, 1}), Tensor::from_values({1, 1}, {40.0})};
    Tensor psi = random_tensor({3, 4}, rng), prev = random_tensor({3, 4}, rng);
    auto r = coref_across(psi, prev, open);
    bool gate_one = true;
    for (Real g : r.gate.values()) gate_one = gate_one && g == 1.0;
    out.push_back({"saturated_gate_keeps_new_location", gate_one && same(r.locations, psi)});
  }
  {
    ParamSet ps;
    const GraphConfig cfg = small_graph();
    GraphParams gp = GraphParams::create(ps, cfg, rng);
    Tensor nu = random_tensor({3, 4}, rng);
    GraphState g = init_graph(nu, gp, cfg);
    bool rows = true;
    for (std::size_t i = 0; i < 3; ++i) rows = rows && same(slice_rows(g.locations, i, i + 1), gp.specials.somewhere);
    out.push_back({"init_graph_entities_equal_nu", same(g.entities, nu)});
    out.push_back({"init_graph_locations_somewhere", rows});
    out.push_back({"init_graph_identity_adjacency", same(g.coref, identity_matrix(3))});
  }
  return out;
}

StateTable make_table(const std::string& id, const std::vector<std::string>& entities,
                      const std::vector<std::string>& rows) {
  StateTable t;
  t.process_id = id;
  t.entities = entities;
  for (const auto& r : rows) {
    std::vector<LocationCell> cells;
    for (const auto& c : split_ws(r)) cells.push_back(parse_cell(c));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

StateTable gold_table(const CraftedScorerCase& c) { return make_table(c.name, c.entities, c.gold); }

StateTable pred_table(const CraftedScorerCase& c) {
  StateTable t = make_table(c.name, c.entities, c.pred);
  if (c.reverse_pred) {
    std::reverse(t.entities.begin(), t.entities.end());
    std::reverse(t.rows.begin(), t.rows.end());
  }
  return t;
}

// Each expectation below was worked out by hand from the question and tuple
// definitions, not by running the scorer.
std::vector<CraftedScorerCase> crafted_scorer_cases() {
  using T1 = std::array<std::array<std::size_t, 2>, 3>;
  using T2 = std::array<std::array<std::size_t, 3>, 4>;
  const std::vector<std::string> w{"water"};
  const std::vector<std::string> ws{"water", "sugar"};
  return {
      {"c01_identity_move", w, {"soil soil root root"}, {"soil soil root root"}, false,
       T1{{{3, 3}, {1, 1}, {2, 2}}}, T2{{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {1, 1, 1}}}},
      {"c02_steps_off_by_one", w, {"- soil - -"}, {"- - soil -"}, false,
       T1{{{3, 3}, {2, 0}, {2, 2}}}, T2{{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0}}}},
      {"c03_pred_all_nowhere", w, {"? soil root -"}, {"- - - -"}, false,
       T1{{{3, 1}, {2, 0}, {3, 0}}}, T2{{{0, 1, 0}, {0, 0, 0}, {0, 0, 0}, {0, 2, 0}}}},
      {"c04_conversion_exact", ws, {"soil soil - -", "- - leaf leaf"}, {"soil soil - -", "- - leaf leaf"}, false,
       T1{{{6, 6}, {2, 2}, {2, 2}}}, T2{{{1, 1, 1}, {1, 1, 1}, {1, 1, 1}, {0, 0, 0}}}},
      {"c05_conversion_split", ws, {"soil soil - -", "- - leaf leaf"}, {"soil soil - -", "- - - leaf"}, false,
       T1{{{6, 6}, {2, 1}, {2, 2}}}, T2{{{1, 1, 1}, {1, 1, 1}, {0, 1, 0}, {0, 0, 0}}}},
      {"c06_wrong_destination", w, {"? soil root root"}, {"? soil stem stem"}, false,
       T1{{{3, 3}, {1, 1}, {2, 1}}}, T2{{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {2, 2, 1}}}},
      {"c07_article_ignored", w, {"? soil soil soil"}, {"? the_soil soil soil"}, false,
       T1{{{3, 3}, {1, 1}, {2, 2}}}, T2{{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {1, 1, 1}}}},
      {"c08_somewhere_vs_span", w, {"- ? ? -"}, {"- soil soil -"}, false,
       T1{{{3, 3}, {2, 2}, {2, 0}}}, T2{{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0}}}},
      {"c09_spurious_move", w, {"soil soil soil soil"}, {"soil soil root root"}, false,
       T1{{{3, 2}, {0, 0}, {0, 0}}}, T2{{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {1, 0, 0}}}},
      {"c10_one_of_two_moves", w, {"soil root leaf leaf"}, {"soil root root root"}, false,
       T1{{{3, 3}, {1, 0}, {2, 0}}}, T2{{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {1, 2, 1}}}},
      {"c11_spurious_creation", ws, {"- - soil soil", "leaf leaf leaf leaf"},
       {"- - soil soil", "- leaf leaf leaf"}, false,
       T1{{{6, 5}, {1, 1}, {1, 1}}}, T2{{{0, 0, 0}, {2, 1, 1}, {0, 0, 0}, {0, 0, 0}}}},
      {"c12_destroy_then_recreate", w, {"soil - soil soil"}, {"soil - soil soil"}, false,
       T1{{{3, 3}, {2, 2}, {2, 2}}}, T2{{{0, 0, 0}, {1, 1, 1}, {0, 0, 0}, {0, 0, 0}}}},
      {"c13_late_destruction", w, {"soil root - -"}, {"soil soil soil -"}, false,
       T1{{{3, 2}, {2, 0}, {3, 0}}}, T2{{{1, 1, 1}, {0, 0, 0}, {0, 0, 0}, {0, 1, 0}}}},
      {"c14_partial_conversion", {"water", "sugar", "gas"}, {"leaf leaf - -", "- - leaf leaf", "- - ? ?"},
       {"leaf leaf - -", "- - leaf leaf", "- - - -"}, false,
       T1{{{9, 8}, {3, 2}, {3, 2}}}, T2{{{1, 1, 1}, {1, 2, 1}, {1, 1, 0}, {0, 0, 0}}}},
      {"c15_conversion_wrong_step", ws, {"leaf - - -", "- ? ? ?"}, {"leaf leaf - -", "- - ? ?"}, false,
       T1{{{6, 6}, {2, 0}, {2, 2}}}, T2{{{1, 1, 1}, {1, 1, 1}, {1, 1, 0}, {0, 0, 0}}}},
      {"c16_no_predicted_tuples", w, {"soil root root root"}, {"soil soil soil soil"}, false,
       T1{{{3, 2}, {1, 0}, {2, 0}}}, T2{{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0, 1, 0}}}},
      {"c17_somewhere_round_trip", w, {"? soil ? ?"}, {"? soil ? ?"}, false,
       T1{{{3, 3}, {1, 1}, {2, 2}}}, T2{{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {2, 2, 2}}}},
      {"c18_multiword_article", w, {"? plant_cell plant_cell -"}, {"? the_plant_cell plant_cell -"}, false,
       T1{{{3, 3}, {2, 2}, {3, 3}}}, T2{{{1, 1, 1}, {0, 0, 0}, {0, 0, 0}, {1, 1, 1}}}},
      {"c19_never_exists", w, {"- - - -"}, {"- - - -"}, false,
       T1{{{3, 3}, {0, 0}, {0, 0}}}, T2{{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0}}}},
      {"c20_created_wrong_place", w, {"- soil soil soil"}, {"- root root root"}, false,
       T1{{{3, 3}, {1, 1}, {1, 0}}}, T2{{{0, 0, 0}, {1, 1, 1}, {0, 0, 0}, {0, 0, 0}}}},
      {"c21_spurious_destruction", w, {"soil root root root"}, {"soil root - -"}, false,
       T1{{{3, 2}, {1, 1}, {2, 2}}}, T2{{{1, 0, 0}, {0, 0, 0}, {0, 0, 0}, {1, 1, 1}}}},
      {"c22_duplicate_moves", ws, {"soil root root root", "soil root root root"},
       {"soil root root root", "soil soil soil soil"}, false,
       T1{{{6, 5}, {2, 1}, {4, 2}}}, T2{{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {1, 2, 1}}}},
      {"c23_two_creations", w, {"- soil - soil"}, {"- soil - soil"}, false,
       T1{{{3, 3}, {2, 2}, {2, 2}}}, T2{{{0, 0, 0}, {1, 1, 1}, {0, 0, 0}, {0, 0, 0}}}},
      {"c24_extra_creation", w, {"- soil soil soil"}, {"- soil - soil"}, false,
       T1{{{3, 2}, {1, 0}, {1, 0}}}, T2{{{0, 0, 0}, {1, 1, 1}, {0, 0, 0}, {0, 0, 0}}}},
      {"c25_single_step", w, {"? -"}, {"? ?"}, false,
       T1{{{3, 2}, {1, 0}, {1, 0}}}, T2{{{0, 1, 0}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0}}}},
      {"c26_entity_order", ws, {"soil soil - -", "- - leaf leaf"}, {"soil soil - -", "- - leaf leaf"}, true,
       T1{{{6, 6}, {2, 2}, {2, 2}}}, T2{{{1, 1, 1}, {1, 1, 1}, {1, 1, 1}, {0, 0, 0}}}},
  };
}

std::vector<CraftedViolationCase> crafted_violation_cases() {
  const std::vector<std::vector<std::string>> early{{"water", "falls", "."}, {"it", "flows", "."}};
  const std::vector<std::vector<std::string>> late{{"rain", "falls", "."}, {"water", "flows", "."}};
  return {
      {"v1_no_events", early, {"water"}, {"? ? ?"}, {"soil soil soil"}, 0, 0, {0, 0, 0}},
      {"v2_move_before_existence", early, {"water"}, {"- - ?"}, {"soil root root"}, 1, 1, {1, 0, 0}},
      {"v3_create_while_existing", early, {"water"}, {"? ? ?"}, {"- soil soil"}, 1, 1, {0, 1, 0}},
      {"v4_change_before_mention", late, {"water"}, {"? ? ?"}, {"soil root root"}, 1, 1, {0, 0, 1}},
      {"v5_valid_lifecycle", early, {"water"}, {"- ? -"}, {"- soil -"}, 2, 0, {0, 0, 0}},
      {"v6_two_rules_one_event", late, {"water"}, {"- - ?"}, {"soil - soil"}, 2, 1, {1, 0, 1}},
      {"v7_never_mentioned", early, {"gas"}, {"? ? ?"}, {"? soil soil"}, 1, 1, {0, 0, 1}},
  };
}

ProcessInstance violation_instance(const CraftedViolationCase& c) {
  LocationGrid grid(c.entities.size(), c.sentences.size() + 1);
  for (std::size_t i = 0; i < c.gold.size(); ++i) {
    const auto cells = split_ws(c.gold[i]);
    for (std::size_t t = 0; t < cells.size(); ++t) {
      grid.at(i, t) = cells[t] == "-" ? LocationState::nowhere() : LocationState::somewhere();
    }
  }
  return make_instance(c.name, c.sentences, c.entities, grid);
}

}  // namespace dkg::testing
