// SPDX-License-Identifier: Apache-2.0
#include "kecr/preference.hpp"

#include <cmath>

#include "kecr/errors.hpp"
#include "kecr/numerics.hpp"

namespace kecr {

void init_preference(ParameterStore& store, const Config& cfg, Rng& rng) {
  const std::size_t d = cfg.embed_dim;
  store.add_uniform("pref.W3", {1, d}, d, rng);
  store.add_uniform("pref.W4", {d, d}, d, rng);
}

PreferenceParams preference_params(const ParameterStore& store) {
  return PreferenceParams{store.value("pref.W3"), store.value("pref.W4")};
}

namespace {

Tensor column(const Tensor& D, std::size_t j) {
  Tensor c({D.rows()});
  for (std::size_t i = 0; i < D.rows(); ++i) c[i] = D.at(i, j);
  return c;
}

void require_belief(const Tensor& D) {
  if (D.rank() != 2 || D.cols() == 0 || D.rows() == 0) throw EmptyBeliefError();
}

Tensor combine(const Tensor& D, const Tensor& w) {
  Tensor u({D.rows()});
  for (std::size_t j = 0; j < D.cols(); ++j) {
    for (std::size_t i = 0; i < D.rows(); ++i) u[i] += w[j] * D.at(i, j);
  }
  return u;
}

}  // namespace

Tensor attention_weights(const PreferenceParams& p, const Tensor& D) {
  require_belief(D);
  Tensor scores({D.cols()});
  for (std::size_t j = 0; j < D.cols(); ++j) {
    scores[j] = linear(p.W3, kecr::tanh(linear(p.W4, column(D, j))))[0];
  }
  return softmax(scores);
}

Tensor attend_context(const PreferenceParams& p, const Tensor& D) { return combine(D, attention_weights(p, D)); }

Tensor damping_weights(double gamma, std::size_t E, bool normalize) {
  Tensor w({E});
  double total = 0.0;
  for (std::size_t i = 0; i < E; ++i) {
    w[i] = std::pow(gamma, static_cast<double>(E - 1 - i));
    total += w[i];
  }
  if (normalize) {
    for (auto& v : w.values()) v /= total;
  }
  return w;
}

Tensor damp_time(double gamma, const Tensor& D, bool normalize) {
  require_belief(D);
  return combine(D, damping_weights(gamma, D.cols(), normalize));
}

Tensor mine_preference(const PreferenceParams& p, double gamma, const Tensor& D, bool normalize) {
  const Tensor a = attend_context(p, D);
  const Tensor b = damp_time(gamma, D, normalize);
  Tensor u(a.shape());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = 0.5 * (a[i] + b[i]);
  return u;
}

ad::Var attend_context(ad::Tape& tape, ParameterStore& store, const std::vector<ad::Var>& columns,
                       bool requires_grad) {
  if (columns.empty()) throw EmptyBeliefError();
  ad::Var W3 = tape.param(store, "pref.W3", requires_grad);
  ad::Var W4 = tape.param(store, "pref.W4", requires_grad);
  std::vector<ad::Var> scores;
  for (const auto& c : columns) scores.push_back(ad::matvec(W3, ad::tanh(ad::matvec(W4, c))));
  return ad::weighted_sum(columns, ad::softmax(ad::concat(scores)));
}

ad::Var damp_time(ad::Tape& tape, double gamma, const std::vector<ad::Var>& columns, bool normalize) {
  if (columns.empty()) throw EmptyBeliefError();
  return ad::weighted_sum(columns, tape.constant(damping_weights(gamma, columns.size(), normalize)));
}

ad::Var mine_preference(ad::Tape& tape, ParameterStore& store, double gamma, const std::vector<ad::Var>& columns,
                        bool normalize, bool requires_grad) {
  ad::Var a = attend_context(tape, store, columns, requires_grad);
  ad::Var b = damp_time(tape, gamma, columns, normalize);
  return ad::scale(ad::add(a, b), 0.5);
}

}  // namespace kecr
