// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "doctest.h"

#include "kecr/config.hpp"
#include "kecr/errors.hpp"
#include "kecr/policy.hpp"
#include "kecr/preference.hpp"
#include "kecr/rng.hpp"

using namespace kecr;

namespace {

PolicyParams zero_policy(std::size_t d) {
  return {Tensor({3, d}), Tensor({3}), Tensor({d, d}), Tensor({d})};
}

PreferenceParams zero_preference(std::size_t d) { return {Tensor({1, d}), Tensor({d, d})}; }

Tensor columns(std::initializer_list<std::pair<double, double>> cols) {
  Tensor D({2, cols.size()});
  std::size_t j = 0;
  for (auto [x, y] : cols) {
    D.at(0, j) = x;
    D.at(1, j) = y;
    ++j;
  }
  return D;
}

}  // namespace

TEST_SUITE("policy") {
  TEST_CASE("zero parameters give uniform probabilities") {
    const Tensor p = predict_action(zero_policy(4), Tensor::vector({1, -2, 3, 0.5}));
    for (double v : p.values()) CHECK(std::abs(v - 1.0 / 3.0) < 1e-15);
    CHECK(argmax_action(p) == Action::query);
  }

  TEST_CASE("bias (10, 0, 0) favors query") {
    PolicyParams p = zero_policy(2);
    p.b1 = Tensor::vector({10.0, 0.0, 0.0});
    const Tensor probs = predict_action(p, Tensor::vector({0.3, 0.7}));
    CHECK(std::abs(probs[0] - 0.99990) < 1e-5);
    CHECK(std::abs(probs[1] - 0.00005) < 1e-5);
    CHECK(std::abs(probs[2] - 0.00005) < 1e-5);
    CHECK(argmax_action(probs) == Action::query);
  }

  TEST_CASE("argmax tie break follows action order") {
    CHECK(argmax_action(Tensor::vector({0.2, 0.4, 0.4})) == Action::recommend);
    CHECK(argmax_action(Tensor::vector({0.1, 0.1, 0.8})) == Action::chat);
  }

  TEST_CASE("cross entropy") {
    const Tensor uniform = Tensor::vector({1.0 / 3, 1.0 / 3, 1.0 / 3});
    for (Action a : {Action::query, Action::recommend, Action::chat}) {
      CHECK(std::abs(policy_loss(uniform, a) - std::log(3.0)) < 1e-12);
    }
    CHECK(std::abs(std::log(3.0) - 1.098612) < 1e-6);
    CHECK(policy_loss(Tensor::vector({0.0, 1.0, 0.0}), Action::recommend) == 0.0);
    CHECK(std::isfinite(policy_loss(Tensor::vector({0.0, 1.0, 0.0}), Action::query)));
  }

  TEST_CASE("tape prediction matches values") {
    Config cfg;
    cfg.embed_dim = 5;
    Rng rng(4);
    ParameterStore s;
    init_policy(s, cfg, rng);
    const Tensor q = Tensor::vector({0.1, -0.4, 0.9, 0.0, 0.3});
    ad::Tape t;
    CHECK(predict_action(t, s, t.constant(q)).value() == predict_action(policy_params(s), q));
  }
}

TEST_SUITE("preference") {
  TEST_CASE("single column") {
    Rng rng(3);
    PreferenceParams p{Tensor({1, 2}), Tensor({2, 2})};
    for (auto& v : p.W3.values()) v = rng.uniform(-1, 1);
    for (auto& v : p.W4.values()) v = rng.uniform(-1, 1);
    const Tensor D = columns({{0.3, -0.8}});
    CHECK(attend_context(p, D) == Tensor::vector({0.3, -0.8}));
    CHECK(damp_time(0.95, D) == Tensor::vector({0.3, -0.8}));
    const Tensor u = mine_preference(p, 0.95, D);
    CHECK(std::abs(u[0] - 0.3) < 1e-15);
    CHECK(std::abs(u[1] + 0.8) < 1e-15);
  }

  TEST_CASE("identical columns attend evenly") {
    Rng rng(8);
    PreferenceParams p{Tensor({1, 2}), Tensor({2, 2})};
    for (auto& v : p.W3.values()) v = rng.uniform(-1, 1);
    for (auto& v : p.W4.values()) v = rng.uniform(-1, 1);
    const Tensor D = columns({{0.5, 0.2}, {0.5, 0.2}});
    const Tensor a = attention_weights(p, D);
    CHECK(std::abs(a[0] - 0.5) < 1e-15);
    CHECK(max_abs_diff(attend_context(p, D), Tensor::vector({0.5, 0.2})) < 1e-15);
  }

  TEST_CASE("zero attention over (1,0) and (0,1)") {
    const Tensor u = attend_context(zero_preference(2), columns({{1, 0}, {0, 1}}));
    CHECK(std::abs(u[0] - 0.5) < 1e-15);
    CHECK(std::abs(u[1] - 0.5) < 1e-15);
  }

  TEST_CASE("empty belief") {
    CHECK_THROWS_AS(attend_context(zero_preference(2), Tensor()), EmptyBeliefError);
  }

  TEST_CASE("damping with gamma one is the plain mean") {
    const Tensor D = columns({{1, 2}, {3, 4}, {5, 9}});
    const Tensor u = damp_time(1.0, D);
    CHECK(std::abs(u[0] - 3.0) < 1e-15);
    CHECK(std::abs(u[1] - 5.0) < 1e-15);
  }

  TEST_CASE("damping with gamma one half over three columns") {
    const Tensor raw = damping_weights(0.5, 3, false);
    CHECK(raw == Tensor::vector({0.25, 0.5, 1.0}));
    const Tensor w = damping_weights(0.5, 3);
    CHECK(std::abs(w[0] - 1.0 / 7) < 1e-15);
    CHECK(std::abs(w[1] - 2.0 / 7) < 1e-15);
    CHECK(std::abs(w[2] - 4.0 / 7) < 1e-15);
    const Tensor u = damp_time(0.5, columns({{1, 0}, {0, 1}, {1, 1}}));
    CHECK(std::abs(u[0] - 5.0 / 7) < 1e-12);
    CHECK(std::abs(u[1] - 6.0 / 7) < 1e-12);
  }

  TEST_CASE("full fusion on the three-column case") {
    const Tensor D = columns({{1, 0}, {0, 1}, {1, 1}});
    // Zero attention parameters weight the columns 1/3 each: u_cont = (2/3, 2/3).
    const double cont0 = (1.0 + 0.0 + 1.0) / 3.0, cont1 = (0.0 + 1.0 + 1.0) / 3.0;
    const double time0 = 5.0 / 7.0, time1 = 6.0 / 7.0;
    const Tensor u = mine_preference(zero_preference(2), 0.5, D);
    CHECK(std::abs(u[0] - (cont0 + time0) / 2.0) < 1e-12);
    CHECK(std::abs(u[1] - (cont1 + time1) / 2.0) < 1e-12);
  }

  TEST_CASE("fusion of (1,0) and (0,1) halves") {
    // Gamma one makes both halves the plain mean.
    const Tensor u = mine_preference(zero_preference(2), 1.0, columns({{1, 0}, {0, 1}}));
    CHECK(std::abs(u[0] - 0.5) < 1e-15);
    CHECK(std::abs(u[1] - 0.5) < 1e-15);
  }
}
