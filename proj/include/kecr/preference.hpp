// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "kecr/autodiff.hpp"
#include "kecr/config.hpp"
#include "kecr/params.hpp"

namespace kecr {

// Belief matrices are [d x E], one column per mention, oldest first.
// Parameter names: pref.W3 [1 x d], pref.W4 [d x d].

struct PreferenceParams {
  Tensor W3, W4;
};

void init_preference(ParameterStore& store, const Config& cfg, Rng& rng);
PreferenceParams preference_params(const ParameterStore& store);

/// alpha = softmax(W3 tanh(W4 D)), one weight per column.
Tensor attention_weights(const PreferenceParams& p, const Tensor& D);
/// u_cont = D alpha. Throws EmptyBeliefError for E = 0.
Tensor attend_context(const PreferenceParams& p, const Tensor& D);

/// gamma^(E-i) for i = 1..E, divided by their sum when `normalize` is set.
Tensor damping_weights(double gamma, std::size_t E, bool normalize = true);
/// u_time = D w.
Tensor damp_time(double gamma, const Tensor& D, bool normalize = true);

/// u = (u_cont + u_time) / 2.
Tensor mine_preference(const PreferenceParams& p, double gamma, const Tensor& D, bool normalize = true);

ad::Var attend_context(ad::Tape& tape, ParameterStore& store, const std::vector<ad::Var>& columns,
                       bool requires_grad = true);
ad::Var damp_time(ad::Tape& tape, double gamma, const std::vector<ad::Var>& columns, bool normalize = true);
ad::Var mine_preference(ad::Tape& tape, ParameterStore& store, double gamma, const std::vector<ad::Var>& columns,
                        bool normalize = true, bool requires_grad = true);

}  // namespace kecr
