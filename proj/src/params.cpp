// SPDX-License-Identifier: Apache-2.0
#include "kecr/params.hpp"

#include <cmath>
#include <vector>

#include "kecr/errors.hpp"

namespace kecr {

Parameter& ParameterStore::add(const std::string& name, Tensor value, bool trainable) {
  if (contains(name)) throw ConfigError("parameter '" + name + "' already exists");
  Parameter p;
  p.grad = Tensor(value.shape());
  p.m = Tensor(value.shape());
  p.v = Tensor(value.shape());
  p.value = std::move(value);
  p.trainable = trainable;
  return entries_.emplace(name, std::move(p)).first->second;
}

Parameter& ParameterStore::add_uniform(const std::string& name, Shape shape, std::size_t fan_in,
                                       Rng& rng, bool trainable) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor t(std::move(shape));
  for (auto& x : t.values()) x = rng.uniform(-bound, bound);
  return add(name, std::move(t), trainable);
}

Parameter& ParameterStore::at(std::string_view name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw NotFoundError("unknown parameter '" + std::string(name) + "'");
  return it->second;
}

const Parameter& ParameterStore::at(std::string_view name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw NotFoundError("unknown parameter '" + std::string(name) + "'");
  return it->second;
}

void ParameterStore::zero_grad() {
  for (auto& [_, p] : entries_) p.grad.fill(0.0);
}

double ParameterStore::grad_norm_squared() const {
  double s = 0.0;
  for (const auto& [_, p] : entries_) {
    for (double g : p.grad.values()) s += g * g;
  }
  return s;
}

bool ParameterStore::same_values(const ParameterStore& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  for (; a != entries_.end(); ++a, ++b) {
    if (a->first != b->first || !(a->second.value == b->second.value)) return false;
  }
  return true;
}

void adam_step(ParameterStore& store, const AdamOptions& options, const ParameterFilter& select) {
  for (auto& [name, p] : store) {
    if (p.trainable && (!select || select(name))) {
      ++p.step;
      const double bias1 = 1.0 - std::pow(options.beta1, static_cast<double>(p.step));
      const double bias2 = 1.0 - std::pow(options.beta2, static_cast<double>(p.step));
      auto value = p.value.values();
      auto grad = p.grad.values();
      auto m = p.m.values();
      auto v = p.v.values();
      for (std::size_t i = 0; i < value.size(); ++i) {
        const double g = grad[i];
        m[i] = options.beta1 * m[i] + (1.0 - options.beta1) * g;
        v[i] = options.beta2 * v[i] + (1.0 - options.beta2) * g * g;
        const double m_hat = m[i] / bias1;
        const double v_hat = v[i] / bias2;
        value[i] -= options.lr * (m_hat / (std::sqrt(v_hat) + options.eps) + options.weight_decay * value[i]);
      }
    }
    p.grad.fill(0.0);
  }
}

ParameterFilter prefix_filter(std::initializer_list<std::string_view> prefixes) {
  std::vector<std::string> owned(prefixes.begin(), prefixes.end());
  return [owned = std::move(owned)](std::string_view name) {
    for (const auto& p : owned) {
      if (name.substr(0, p.size()) == p) return true;
    }
    return false;
  };
}

}  // namespace kecr
