// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "kecr/autodiff.hpp"
#include "kecr/config.hpp"
#include "kecr/corpus.hpp"
#include "kecr/params.hpp"

namespace kecr {

/// a = softmax(W1 relu(W2 q + b2) + b1) over (query, recommend, chat).
/// Parameter names: policy.W1 [3 x h], policy.b1 [3], policy.W2 [h x d],
/// policy.b2 [h], with h = d.
struct PolicyParams {
  Tensor W1, b1, W2, b2;
};

void init_policy(ParameterStore& store, const Config& cfg, Rng& rng);
PolicyParams policy_params(const ParameterStore& store);

Tensor predict_action(const PolicyParams& p, const Tensor& q);
/// First maximum in query < recommend < chat order.
Action argmax_action(const Tensor& probs);
/// -log probs[gold], clamped at 1e-12.
double policy_loss(const Tensor& probs, Action gold);

ad::Var predict_action(ad::Tape& tape, ParameterStore& store, ad::Var q, bool requires_grad = true);
ad::Var policy_loss(ad::Var probs, Action gold);

}  // namespace kecr
