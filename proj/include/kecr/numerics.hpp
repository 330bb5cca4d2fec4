// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "kecr/tensor.hpp"

namespace kecr {

// Value-level kernels. The tape operations in autodiff.hpp use these for
// their forward passes, so both paths produce identical numbers.

/// y = W x (+ b). Throws ShapeError naming both shapes on mismatch.
Tensor linear(const Tensor& W, const Tensor& x, const Tensor* b = nullptr);

double sigmoid(double x);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor relu(const Tensor& x);
/// Max-subtracted softmax over a vector.
Tensor softmax(const Tensor& x);

/// Gates of the GRU cell. Shapes: W_* [d x d_in], U_* [d x d], b_* [d].
struct GruWeights {
  Tensor W_z, U_z, b_z;
  Tensor W_r, U_r, b_r;
  Tensor W_h, U_h, b_h;
};

/// Cho-style recurrence:
///   z = sigmoid(W_z x + U_z h + b_z), r = sigmoid(W_r x + U_r h + b_r)
///   c = tanh(W_h x + U_h (r * h) + b_h), h' = z * h + (1 - z) * c
Tensor gru_cell(const GruWeights& w, const Tensor& h_prev, const Tensor& x);

}  // namespace kecr
