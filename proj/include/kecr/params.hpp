// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>

#include "kecr/rng.hpp"
#include "kecr/tensor.hpp"

namespace kecr {

struct Parameter {
  Tensor value;
  Tensor grad;
  bool trainable = true;
  // Adam moment buffers and the number of updates this entry has received.
  Tensor m;
  Tensor v;
  std::uint64_t step = 0;
};

/// Named parameter tensors with gradient accumulators. Iteration order is
/// lexicographic by name, which keeps checkpoints and updates deterministic.
class ParameterStore {
 public:
  Parameter& add(const std::string& name, Tensor value, bool trainable = true);

  /// Uniform on [-1/sqrt(fan_in), +1/sqrt(fan_in)].
  Parameter& add_uniform(const std::string& name, Shape shape, std::size_t fan_in, Rng& rng,
                         bool trainable = true);

  bool contains(std::string_view name) const { return entries_.find(name) != entries_.end(); }
  Parameter& at(std::string_view name);
  const Parameter& at(std::string_view name) const;
  const Tensor& value(std::string_view name) const { return at(name).value; }

  std::size_t size() const noexcept { return entries_.size(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  void zero_grad();
  /// Sum of squared gradient entries, handy for tests and diagnostics.
  double grad_norm_squared() const;

  /// Value-only equality (gradients and moments ignored).
  bool same_values(const ParameterStore& other) const;

 private:
  std::map<std::string, Parameter, std::less<>> entries_;
};

struct AdamOptions {
  double lr = 0.001;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

using ParameterFilter = std::function<bool(std::string_view name)>;

/// One Adam update over trainable entries accepted by `select` (all trainable
/// entries when empty). Weight decay is decoupled: w -= lr * weight_decay * w
/// alongside the moment step.
/// Every gradient in the store is zeroed afterwards.
void adam_step(ParameterStore& store, const AdamOptions& options, const ParameterFilter& select = {});

/// Filter accepting names that start with any of the given prefixes.
ParameterFilter prefix_filter(std::initializer_list<std::string_view> prefixes);

}  // namespace kecr
