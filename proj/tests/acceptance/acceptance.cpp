// SPDX-License-Identifier: Apache-2.0
// Acceptance runner: one PASS/FAIL line per criterion. Tolerances and time
// limits are fixed here. An optional argument selects criteria by name.
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "kecr/checkpoint.hpp"
#include "kecr/graph_encoder.hpp"
#include "kecr/kg.hpp"
#include "kecr/mi_pretrainer.hpp"
#include "kecr/policy.hpp"
#include "kecr/preference.hpp"
#include "kecr/reasoner.hpp"

#include "fixtures.hpp"
#include "gradient_suite.hpp"
#include "kg_invariants.hpp"
#include "metric_oracles.hpp"
#include "scenarios.hpp"

namespace {

using namespace kecr;
using namespace kecr::testing;

constexpr double kOracleTolerance = 1e-5;
constexpr double kGradientSeconds = 60.0;
constexpr double kKgSeconds = 5.0;
constexpr double kMiSeconds = 180.0;
constexpr double kPolicySeconds = 120.0;
constexpr double kReasonerSeconds = 300.0;
constexpr double kMiPositiveMin = 0.8;
constexpr double kMiNegativeMax = 0.2;
constexpr std::size_t kMiEarlyDecreasesMax = 1;
constexpr double kPolicyAccuracyMin = 0.95;
constexpr double kReasonerAccuracyMin = 0.9;
constexpr double kUntrainedMax = 0.2;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  std::function<Outcome()> run;
};

Outcome gradient_suite() {
  Stopwatch clock;
  const auto families = run_gradient_suite();
  bool ok = true;
  std::string detail;
  double worst = 0.0;
  for (const auto& f : families) {
    worst = std::max(worst, f.max_rel_error);
    if (f.max_rel_error >= kGradTolerance || f.instances < kGradInstances) {
      ok = false;
      detail += fmt::format(" {} failed ({:.3e} at {});", f.family, f.max_rel_error, f.worst);
    }
  }
  const double s = clock.seconds();
  ok = ok && s < kGradientSeconds;
  return {ok, fmt::format("{} families x {} instances, max rel error {:.2e} (< {:.0e}), {:.1f} s (< {:.0f} s){}",
                          families.size(), kGradInstances, worst, kGradTolerance, s, kGradientSeconds, detail)};
}

Outcome equation_oracles() {
  std::vector<std::pair<std::string, double>> errors;

  {  // One graph convolution layer on A -> {B, C} with identity weights.
    KnowledgeGraph g;
    const RelationId r = g.add_relation("Genre");
    const EntityId a = g.add_entity("A", EntityKind::item), b = g.add_entity("B", EntityKind::attribute),
                   c = g.add_entity("C", EntityKind::attribute);
    g.add_triple(a, r, b);
    g.add_triple(a, r, c);
    ParameterStore s;
    s.add(graph_base_name(), Tensor::matrix(3, 2, {1, 0, 0, 1, 1, 1}));
    s.add(graph_self_name(0), Tensor::identity(2));
    s.add(graph_relation_name(0, r), Tensor::identity(2));
    Config cfg;
    cfg.embed_dim = 2;
    const Tensor E = encode_entities(g, s, cfg);
    const double want = 0.880797;
    errors.emplace_back("graph conv sigma(2,2)",
                        std::max(std::abs(E.at(0, 0) - want), std::abs(E.at(0, 1) - want)));
  }
  {  // Damping with gamma 0.5 over (1,0), (0,1), (1,1).
    const Tensor u = damp_time(0.5, Tensor::matrix(2, 3, {1, 0, 1, 0, 1, 1}));
    errors.emplace_back("damping (5/7, 6/7)", std::max(std::abs(u[0] - 5.0 / 7.0), std::abs(u[1] - 6.0 / 7.0)));
  }
  {  // Policy output with bias (10, 0, 0).
    PolicyParams p{Tensor({3, 2}), Tensor::vector({10, 0, 0}), Tensor({2, 2}), Tensor({2})};
    const Tensor probs = predict_action(p, Tensor::vector({0.4, -0.3}));
    errors.emplace_back("softmax(10,0,0)", std::max({std::abs(probs[0] - 0.99990), std::abs(probs[1] - 0.00005),
                                                     std::abs(probs[2] - 0.00005)}));
  }
  {  // Classifier with zero parameters on 2 positives and 8 negatives.
    ParameterStore s;
    Config cfg;
    cfg.embed_dim = 3;
    Rng rng(1);
    init_mi_classifier(s, cfg, rng);
    for (auto& [_, p] : s) p.value.fill(0.0);
    std::vector<double> pos, neg;
    for (int i = 0; i < 10; ++i) {
      const double g = mi_classifier(s, Tensor::vector({1.0 * i, 2, 3}), Tensor::vector({-1, 0.5, 1.0 * i}));
      (i < 2 ? pos : neg).push_back(g);
    }
    errors.emplace_back("L_MI at g = 0.5", std::abs(mi_objective(pos, neg) - (-1.386294)));
  }
  {  // Zero projection over the three neighbors of Dead Silence.
    const auto g = expand_graph(toy_graph());
    const Tensor E({g.entity_count(), 2}, 0.7);
    const RelevanceScorer scorer(Tensor({4, 7}), E, Tensor({7}, 0.2));
    ReasoningLabel label;
    label.start = *g.find_entity("Dead Silence");
    label.first_target = *g.find_entity("Horror Film");
    const double l = reasoning_loss(scorer, g, label, 0.0);
    errors.emplace_back("L_r^1 at J = 0.5", std::abs(l - 2.079442));
  }
  {  // Uniform policy output.
    PolicyParams p{Tensor({3, 2}), Tensor({3}), Tensor({2, 2}), Tensor({2})};
    const Tensor probs = predict_action(p, Tensor::vector({1.5, -2}));
    errors.emplace_back("-log(1/3)", std::abs(policy_loss(probs, Action::chat) - 1.098612));
  }

  bool ok = true;
  std::string detail;
  for (const auto& [name, err] : errors) {
    ok = ok && err < kOracleTolerance;
    detail += fmt::format("{}{} err {:.1e}", detail.empty() ? "" : "; ", name, err);
  }
  return {ok, detail + fmt::format(" (< {:.0e})", kOracleTolerance)};
}

Outcome kg_invariants() {
  Stopwatch clock;
  TempDir dir("acceptance-kg");
  const auto lines = random_triples(1000, 300, 2024, 50, 20).lines;
  const auto rep = check_kg_invariants(lines, dir.path());
  const double s = clock.seconds();
  return {rep.ok() && s < kKgSeconds,
          fmt::format("closure {} index {} dedup {} reload {}, {:.2f} s (< {:.0f} s) {}", rep.closure, rep.index_exact,
                      rep.dedup, rep.reload, s, kKgSeconds, rep.detail)};
}

Outcome mi_planted() {
  const auto r = run_mi_scenario();
  const bool ok = r.held.pos_mean_g > kMiPositiveMin && r.held.neg_mean_g < kMiNegativeMax &&
                  r.early_decreases <= kMiEarlyDecreasesMax && r.seconds < kMiSeconds;
  std::string early;
  for (std::size_t i = 0; i < std::min<std::size_t>(5, r.trace.size()); ++i) {
    early += fmt::format("{}{:.4f}", i ? "," : "", r.trace[i].mean_objective);
  }
  return {ok, fmt::format("held-out g pos {:.3f} (> {}) neg {:.3f} (< {}), first epochs [{}] with {} decreases "
                          "(<= {}), {:.1f} s (< {:.0f} s)",
                          r.held.pos_mean_g, kMiPositiveMin, r.held.neg_mean_g, kMiNegativeMax, early,
                          r.early_decreases, kMiEarlyDecreasesMax, r.seconds, kMiSeconds)};
}

Outcome policy_planted() {
  const auto r = run_policy_scenario();
  return {r.accuracy > kPolicyAccuracyMin && r.rounds > 0 && r.seconds < kPolicySeconds,
          fmt::format("held-out accuracy {:.4f} (> {}) over {} rounds, {:.1f} s (< {:.0f} s)", r.accuracy,
                      kPolicyAccuracyMin, r.rounds, r.seconds, kPolicySeconds)};
}

Outcome reasoner_planted() {
  const auto r = run_reasoner_scenario();
  const bool ok = r.step1 >= kReasonerAccuracyMin && r.recall1 >= kReasonerAccuracyMin &&
                  r.untrained_step1 <= kUntrainedMax && r.untrained_recall1 <= kUntrainedMax &&
                  r.reasoning_rounds > 0 && r.seconds < kReasonerSeconds;
  return {ok, fmt::format("{} entities; held-out step1 {:.4f} R@1 {:.4f} (>= {}) R@10 {:.4f} over {} rounds; "
                          "untrained step1 {:.4f} R@1 {:.4f} (<= {}); {:.1f} s (< {:.0f} s)",
                          r.entities, r.step1, r.recall1, kReasonerAccuracyMin, r.recall10, r.reasoning_rounds,
                          r.untrained_step1, r.untrained_recall1, kUntrainedMax, r.seconds, kReasonerSeconds)};
}

Outcome toy_end_to_end() {
  const auto a = run_toy_session();
  const auto b = run_toy_session();
  const auto& req = a.request;
  const bool recommend = req["action"] == "recommend";
  const bool item = req.value("step1", "") == "Dead Silence";
  const std::string explanation = req.value("explanation", "");
  const bool explained = req.value("step2", "") == "James Wan" && explanation.find("James Wan") != std::string::npos;
  const bool deterministic = a.checkpoint == b.checkpoint && a.transcript == b.transcript;
  return {recommend && item && explained && deterministic,
          fmt::format("action {}, step1 {}, explanation \"{}\", greeting answered with {}, deterministic {}",
                      req["action"].get<std::string>(), req.value("step1", "-"), explanation,
                      a.greeting["action"].get<std::string>(), deterministic)};
}

Outcome metric_oracles() {
  const auto rep = run_metric_oracles();
  return {rep.ok(), fmt::format("recall monotone {}, distinct exact {}, bleu(x,[x]) = 1 {}, hand bleu {:.6f} and "
                                "{:.6f} {} (tol {:.0e}), disjoint {}",
                                rep.recall_monotone, rep.distinct_exact, rep.bleu_identity, rep.bleu_hand_value,
                                rep.bleu_hand_partial, rep.bleu_hand, kBleuTolerance, rep.bleu_disjoint)};
}

Outcome reproducibility() {
  TempDir dir("acceptance-repro");
  Config cfg = toy_config();
  cfg.seed = 7;
  const auto data = toy_scenario(50, 42);
  const auto first = dir / "first.json", second = dir / "second.json";
  save_checkpoint(first, cfg, train_toy(data, cfg));
  save_checkpoint(second, cfg, train_toy(data, cfg));
  const std::string x = read_file(first), y = read_file(second);
  return {!x.empty() && x == y, fmt::format("two runs wrote {} and {} bytes, identical {}", x.size(), y.size(), x == y)};
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  const std::string filter = argc > 1 ? argv[1] : "";
  const std::vector<Criterion> criteria = {
      {"gradient-suite", gradient_suite},   {"equation-oracles", equation_oracles},
      {"kg-invariants", kg_invariants},     {"mi-planted", mi_planted},
      {"policy-planted", policy_planted},   {"reasoner-planted", reasoner_planted},
      {"toy-end-to-end", toy_end_to_end},   {"metric-oracles", metric_oracles},
      {"reproducibility", reproducibility},
  };
  int failures = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!filter.empty() && c.name.find(filter) == std::string::npos) continue;
    ++ran;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s  %-18s %s\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failures, ran);
  return failures == 0 && ran > 0 ? 0 : 1;
}
