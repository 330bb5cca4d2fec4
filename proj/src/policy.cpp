// SPDX-License-Identifier: Apache-2.0
#include "kecr/policy.hpp"

#include <algorithm>
#include <cmath>

#include "kecr/errors.hpp"
#include "kecr/numerics.hpp"

namespace kecr {

namespace {
constexpr double kClamp = 1e-12;
}

void init_policy(ParameterStore& store, const Config& cfg, Rng& rng) {
  const std::size_t d = cfg.embed_dim;
  const std::size_t h = d;
  store.add_uniform("policy.W1", {kActionCount, h}, h, rng);
  store.add_uniform("policy.b1", {kActionCount}, h, rng);
  store.add_uniform("policy.W2", {h, d}, d, rng);
  store.add_uniform("policy.b2", {h}, d, rng);
}

PolicyParams policy_params(const ParameterStore& store) {
  return PolicyParams{store.value("policy.W1"), store.value("policy.b1"), store.value("policy.W2"),
                      store.value("policy.b2")};
}

Tensor predict_action(const PolicyParams& p, const Tensor& q) {
  if (p.W1.rank() != 2 || p.W1.rows() != kActionCount) {
    throw ShapeError("policy output layer must have 3 rows, got " + shape_string(p.W1.shape()));
  }
  const Tensor hidden = relu(linear(p.W2, q, &p.b2));
  return softmax(linear(p.W1, hidden, &p.b1));
}

Action argmax_action(const Tensor& probs) {
  if (probs.size() != kActionCount) throw ShapeError("action distribution must have 3 entries");
  std::size_t best = 0;
  for (std::size_t i = 1; i < kActionCount; ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return static_cast<Action>(best);
}

double policy_loss(const Tensor& probs, Action gold) {
  return -std::log(std::max(probs[static_cast<std::size_t>(gold)], kClamp));
}

ad::Var predict_action(ad::Tape& tape, ParameterStore& store, ad::Var q, bool requires_grad) {
  auto p = [&](const char* name) { return tape.param(store, name, requires_grad); };
  ad::Var hidden = ad::relu(ad::linear(p("policy.W2"), q, p("policy.b2")));
  return ad::softmax(ad::linear(p("policy.W1"), hidden, p("policy.b1")));
}

ad::Var policy_loss(ad::Var probs, Action gold) {
  return ad::scale(ad::log(ad::element(probs, static_cast<std::size_t>(gold)), kClamp), -1.0);
}

}  // namespace kecr
