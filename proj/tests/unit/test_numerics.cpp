// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <string>

#include "doctest.h"

#include "kecr/errors.hpp"
#include "kecr/numerics.hpp"
#include "kecr/params.hpp"
#include "kecr/rng.hpp"
#include "kecr/tensor.hpp"

using namespace kecr;

namespace {

GruWeights zero_gru(std::size_t d, std::size_t din) {
  GruWeights w;
  for (Tensor* t : {&w.W_z, &w.W_r, &w.W_h}) *t = Tensor({d, din});
  for (Tensor* t : {&w.U_z, &w.U_r, &w.U_h}) *t = Tensor({d, d});
  for (Tensor* t : {&w.b_z, &w.b_r, &w.b_h}) *t = Tensor({d});
  return w;
}

}  // namespace

TEST_SUITE("numerics") {
  TEST_CASE("linear identity returns the input") {
    const Tensor y = linear(Tensor::identity(2), Tensor::vector({3.0, 4.0}));
    CHECK(y == Tensor::vector({3.0, 4.0}));
  }

  TEST_CASE("linear hand multiplication") {
    const Tensor W = Tensor::matrix(2, 2, {1, 2, 3, 4});
    const Tensor b = Tensor::vector({0.0, 0.0});
    const Tensor y = linear(W, Tensor::vector({1.0, 1.0}), &b);
    CHECK(y[0] == 3.0);
    CHECK(y[1] == 7.0);
  }

  TEST_CASE("zero weights give a zero vector") {
    Rng rng(3);
    Tensor x({4});
    for (auto& v : x.values()) v = rng.uniform(-5, 5);
    const Tensor y = linear(Tensor({3, 4}), x);
    CHECK(y == Tensor({3}));
  }

  TEST_CASE("shape mismatch names both shapes") {
    try {
      linear(Tensor({2, 3}), Tensor({2}));
      FAIL("expected a shape error");
    } catch (const ShapeError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("[2x3]") != std::string::npos);
      CHECK(msg.find("[2]") != std::string::npos);
    }
  }

  TEST_CASE("activations") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(2.0) == doctest::Approx(0.8807970779778823).epsilon(1e-12));
    CHECK(sigmoid(-800.0) >= 0.0);
    CHECK(std::isfinite(sigmoid(800.0)));
    const Tensor r = relu(Tensor::vector({-1.0, 0.0, 2.5}));
    CHECK(r == Tensor::vector({0.0, 0.0, 2.5}));
    CHECK(tanh(Tensor::vector({0.0}))[0] == 0.0);
  }

  TEST_CASE("softmax of (10, 0, 0)") {
    const Tensor p = softmax(Tensor::vector({10.0, 0.0, 0.0}));
    const double z = std::exp(10.0) + 2.0;
    CHECK(p[0] == doctest::Approx(std::exp(10.0) / z).epsilon(1e-12));
    CHECK(p[0] == doctest::Approx(0.99990).epsilon(1e-5));
    CHECK(p[1] == doctest::Approx(1.0 / z).epsilon(1e-12));
    CHECK(std::abs(p[1] - 0.00005) < 1e-5);
  }

  TEST_CASE("softmax is shift invariant and stable") {
    const Tensor a = softmax(Tensor::vector({1000.0, 999.0}));
    const Tensor b = softmax(Tensor::vector({1.0, 0.0}));
    CHECK(max_abs_diff(a, b) < 1e-15);
  }

  TEST_CASE("GRU with zero weights halves the state") {
    const Tensor h = Tensor::vector({0.4, -1.2, 3.0});
    const Tensor out = gru_cell(zero_gru(3, 2), h, Tensor::vector({7.0, -2.0}));
    for (std::size_t i = 0; i < 3; ++i) CHECK(out[i] == doctest::Approx(0.5 * h[i]).epsilon(1e-15));
  }

  TEST_CASE("GRU with a saturated update gate keeps the state") {
    GruWeights w = zero_gru(2, 2);
    w.b_z = Tensor::vector({60.0, 60.0});
    w.b_h = Tensor::vector({1.0, -1.0});
    const Tensor h = Tensor::vector({0.25, -0.75});
    const Tensor out = gru_cell(w, h, Tensor::vector({1.0, 1.0}));
    CHECK(max_abs_diff(out, h) < 1e-12);
  }

  TEST_CASE("Adam with zero gradient and zero decay leaves values unchanged") {
    ParameterStore s;
    s.add("w", Tensor::vector({1.0, -2.0}));
    AdamOptions opt;
    opt.weight_decay = 0.0;
    adam_step(s, opt);
    CHECK(s.value("w") == Tensor::vector({1.0, -2.0}));
  }

  TEST_CASE("Adam leaves frozen entries alone") {
    ParameterStore s;
    s.add("w", Tensor::vector({1.0}), false);
    s.at("w").grad[0] = 5.0;
    adam_step(s, AdamOptions{});
    CHECK(s.value("w")[0] == 1.0);
    CHECK(s.at("w").grad[0] == 0.0);
  }

  TEST_CASE("Adam first step moves by the learning rate") {
    ParameterStore s;
    s.add("w", Tensor::scalar(1.0));
    s.at("w").grad[0] = 1.0;
    AdamOptions opt;
    opt.lr = 0.001;
    opt.weight_decay = 0.0;
    adam_step(s, opt);
    // m_hat = 1, v_hat = 1, so the step is lr / (1 + eps).
    CHECK(std::abs(s.value("w")[0] - 0.999) < 1e-6);
  }

  TEST_CASE("Adam decay is decoupled from the gradient") {
    ParameterStore s;
    s.add("w", Tensor::scalar(2.0));
    AdamOptions opt;
    opt.lr = 0.1;
    opt.weight_decay = 0.5;
    adam_step(s, opt);
    // Zero gradient: only the decay term acts, w -= lr * wd * w.
    CHECK(s.value("w")[0] == doctest::Approx(2.0 - 0.1 * 0.5 * 2.0).epsilon(1e-15));
  }

  TEST_CASE("prefix filter") {
    const auto f = prefix_filter({"policy.", "pref."});
    CHECK(f("policy.W1"));
    CHECK(f("pref.W3"));
    CHECK_FALSE(f("graph.base"));
  }

  TEST_CASE("mix_seed and fnv1a64 are stable") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(mix_seed(1, 2) != mix_seed(2, 1));
    Rng a(5), b(5);
    for (int i = 0; i < 10; ++i) CHECK(a.next() == b.next());
  }
}
