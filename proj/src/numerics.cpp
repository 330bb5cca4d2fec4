// SPDX-License-Identifier: Apache-2.0
#include "kecr/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "kecr/autodiff.hpp"
#include "kecr/errors.hpp"

namespace kecr {

Tensor linear(const Tensor& W, const Tensor& x, const Tensor* b) {
  if (W.rank() != 2 || x.rank() != 1 || W.cols() != x.size()) {
    throw ShapeError("linear: W " + shape_string(W.shape()) + " does not conform to x " +
                     shape_string(x.shape()));
  }
  const std::size_t m = W.rows();
  const std::size_t n = W.cols();
  if (b && (b->rank() != 1 || b->size() != m)) {
    throw ShapeError("linear: bias " + shape_string(b->shape()) + " does not conform to W " +
                     shape_string(W.shape()));
  }
  Tensor y({m});
  for (std::size_t i = 0; i < m; ++i) {
    const double* w = W.values().data() + i * n;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += w[j] * x[j];
    y[i] = b ? acc + (*b)[i] : acc;
  }
  return y;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor sigmoid(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.values()) v = sigmoid(v);
  return y;
}

Tensor tanh(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.values()) v = std::tanh(v);
  return y;
}

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.values()) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor softmax(const Tensor& x) {
  Tensor y = x;
  auto vals = y.values();
  const double top = *std::max_element(vals.begin(), vals.end());
  double total = 0.0;
  for (auto& v : vals) {
    v = std::exp(v - top);
    total += v;
  }
  for (auto& v : vals) v /= total;
  return y;
}

Tensor gru_cell(const GruWeights& w, const Tensor& h_prev, const Tensor& x) {
  ad::Tape tape;
  ad::GruVars vars{tape.constant(w.W_z), tape.constant(w.U_z), tape.constant(w.b_z),
                   tape.constant(w.W_r), tape.constant(w.U_r), tape.constant(w.b_r),
                   tape.constant(w.W_h), tape.constant(w.U_h), tape.constant(w.b_h)};
  return ad::gru_cell(vars, tape.constant(h_prev), tape.constant(x)).value();
}

}  // namespace kecr
