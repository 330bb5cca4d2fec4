// SPDX-License-Identifier: Apache-2.0
#include "kecr/autodiff.hpp"

#include <cmath>

#include "kecr/errors.hpp"
#include "kecr/numerics.hpp"

namespace kecr::ad {

const Tensor& Var::value() const { return tape_->value(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::constant(Tensor value) {
  Node& n = nodes_.emplace_back();
  n.owned = std::move(value);
  n.ref = &n.owned;
  return Var(this, nodes_.size() - 1);
}

Var Tape::param(ParameterStore& store, const std::string& name, bool requires_grad) {
  Parameter& p = store.at(name);
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var(this, it->second);
  Node& n = nodes_.emplace_back();
  n.ref = &p.value;
  n.requires_grad = requires_grad && p.trainable;
  n.param = n.requires_grad ? &p : nullptr;
  const std::size_t id = nodes_.size() - 1;
  param_nodes_.emplace(&p, id);
  return Var(this, id);
}

Var Tape::record(Tensor value, bool requires_grad, Backward backward) {
  Node& n = nodes_.emplace_back();
  n.owned = std::move(value);
  n.ref = &n.owned;
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(backward);
  return Var(this, nodes_.size() - 1);
}

Tensor& Tape::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor(n.ref->shape());
  return n.grad;
}

void Tape::accumulate(std::size_t id, std::span<const double> g) {
  if (!nodes_[id].requires_grad) return;
  auto dst = grad(id).values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
}

void Tape::backward(Var root) {
  if (root.value().size() != 1) {
    throw ShapeError("backward needs a scalar root, got " + shape_string(root.shape()));
  }
  if (!requires_grad(root.id())) return;
  grad(root.id())[0] += 1.0;
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) n.backward(*this, n.grad);
    if (n.param) {
      auto dst = n.param->grad.values();
      auto src = n.grad.values();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }
}

namespace {

Tape& same_tape(Var a, Var b) {
  if (&a.tape() != &b.tape()) throw Error("operands live on different tapes");
  return a.tape();
}

void require_same_shape(const char* op, Var a, Var b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

// Elementwise unary op given the forward value and dy/dx expressed through x and y.
template <typename Fwd, typename Deriv>
Var unary(Var a, Fwd fwd, Deriv deriv) {
  Tape& t = a.tape();
  Tensor y = a.value();
  for (auto& v : y.values()) v = fwd(v);
  const std::size_t ia = a.id();
  Tensor y_saved = a.requires_grad() ? y : Tensor();
  return t.record(std::move(y), a.requires_grad(),
                  [ia, y_saved = std::move(y_saved), deriv](Tape& tp, const Tensor& g) {
                    const Tensor& x = tp.value(ia);
                    Tensor dx(x.shape());
                    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = g[i] * deriv(x[i], y_saved[i]);
                    tp.accumulate(ia, dx.values());
                  });
}

}  // namespace

Var matvec(Var W, Var x) {
  Tape& t = same_tape(W, x);
  Tensor y = kecr::linear(W.value(), x.value());
  const std::size_t iw = W.id(), ix = x.id();
  return t.record(std::move(y), W.requires_grad() || x.requires_grad(), [iw, ix](Tape& tp, const Tensor& g) {
    const Tensor& Wv = tp.value(iw);
    const Tensor& xv = tp.value(ix);
    const std::size_t m = Wv.rows(), n = Wv.cols();
    if (tp.requires_grad(iw)) {
      auto dW = tp.grad(iw).values();
      for (std::size_t i = 0; i < m; ++i) {
        const double gi = g[i];
        if (gi == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) dW[i * n + j] += gi * xv[j];
      }
    }
    if (tp.requires_grad(ix)) {
      auto dx = tp.grad(ix).values();
      for (std::size_t i = 0; i < m; ++i) {
        const double gi = g[i];
        if (gi == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) dx[j] += gi * Wv.values()[i * n + j];
      }
    }
  });
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_shape("add", a, b);
  Tensor y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += b.value()[i];
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(y), a.requires_grad() || b.requires_grad(), [ia, ib](Tape& tp, const Tensor& g) {
    tp.accumulate(ia, g.values());
    tp.accumulate(ib, g.values());
  });
}

Var linear(Var W, Var x, Var b) { return add(matvec(W, x), b); }

Var sub(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_shape("sub", a, b);
  Tensor y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= b.value()[i];
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(y), a.requires_grad() || b.requires_grad(), [ia, ib](Tape& tp, const Tensor& g) {
    tp.accumulate(ia, g.values());
    if (tp.requires_grad(ib)) {
      auto db = tp.grad(ib).values();
      for (std::size_t i = 0; i < db.size(); ++i) db[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_shape("mul", a, b);
  Tensor y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= b.value()[i];
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(y), a.requires_grad() || b.requires_grad(), [ia, ib](Tape& tp, const Tensor& g) {
    const Tensor& av = tp.value(ia);
    const Tensor& bv = tp.value(ib);
    if (tp.requires_grad(ia)) {
      auto da = tp.grad(ia).values();
      for (std::size_t i = 0; i < da.size(); ++i) da[i] += g[i] * bv[i];
    }
    if (tp.requires_grad(ib)) {
      auto db = tp.grad(ib).values();
      for (std::size_t i = 0; i < db.size(); ++i) db[i] += g[i] * av[i];
    }
  });
}

Var scale(Var a, double s) {
  return unary(a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Var one_minus(Var a) {
  return unary(a, [](double x) { return 1.0 - x; }, [](double, double) { return -1.0; });
}

Var sigmoid(Var a) {
  return unary(a, [](double x) { return kecr::sigmoid(x); }, [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var relu(Var a) {
  return unary(a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var log(Var a, double floor) {
  return unary(
      a, [floor](double x) { return std::log(x > floor ? x : floor); },
      [floor](double x, double) { return x > floor ? 1.0 / x : 0.0; });
}

Var softmax(Var a) {
  Tape& t = a.tape();
  Tensor y = kecr::softmax(a.value());
  const std::size_t ia = a.id();
  Tensor y_saved = a.requires_grad() ? y : Tensor();
  return t.record(std::move(y), a.requires_grad(), [ia, y_saved = std::move(y_saved)](Tape& tp, const Tensor& g) {
    double inner = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) inner += g[i] * y_saved[i];
    Tensor dx(y_saved.shape());
    for (std::size_t i = 0; i < g.size(); ++i) dx[i] = y_saved[i] * (g[i] - inner);
    tp.accumulate(ia, dx.values());
  });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat of nothing");
  Tape& t = parts.front().tape();
  std::vector<double> out;
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // (node id, length)
  bool needs = false;
  for (const Var& p : parts) {
    if (&p.tape() != &t) throw Error("operands live on different tapes");
    if (p.value().rank() != 1) throw ShapeError("concat expects vectors, got " + shape_string(p.shape()));
    out.insert(out.end(), p.value().values().begin(), p.value().values().end());
    spans.emplace_back(p.id(), p.value().size());
    needs = needs || p.requires_grad();
  }
  return t.record(Tensor::vector(std::move(out)), needs, [spans = std::move(spans)](Tape& tp, const Tensor& g) {
    std::size_t offset = 0;
    for (auto [id, len] : spans) {
      tp.accumulate(id, g.values().subspan(offset, len));
      offset += len;
    }
  });
}

Var add_n(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("add_n of nothing");
  Tape& t = parts.front().tape();
  Tensor y = parts.front().value();
  std::vector<std::size_t> ids{parts.front().id()};
  bool needs = parts.front().requires_grad();
  for (std::size_t k = 1; k < parts.size(); ++k) {
    if (parts[k].shape() != y.shape()) {
      throw ShapeError("add_n: shape " + shape_string(parts[k].shape()) + " vs " + shape_string(y.shape()));
    }
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += parts[k].value()[i];
    ids.push_back(parts[k].id());
    needs = needs || parts[k].requires_grad();
  }
  return t.record(std::move(y), needs, [ids = std::move(ids)](Tape& tp, const Tensor& g) {
    for (auto id : ids) tp.accumulate(id, g.values());
  });
}

Var dot(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_shape("dot", a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.value().size(); ++i) acc += a.value()[i] * b.value()[i];
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(Tensor::scalar(acc), a.requires_grad() || b.requires_grad(), [ia, ib](Tape& tp, const Tensor& g) {
    const double s = g[0];
    const Tensor& av = tp.value(ia);
    const Tensor& bv = tp.value(ib);
    if (tp.requires_grad(ia)) {
      auto da = tp.grad(ia).values();
      for (std::size_t i = 0; i < da.size(); ++i) da[i] += s * bv[i];
    }
    if (tp.requires_grad(ib)) {
      auto db = tp.grad(ib).values();
      for (std::size_t i = 0; i < db.size(); ++i) db[i] += s * av[i];
    }
  });
}

Var sum(Var a) {
  double acc = 0.0;
  for (double v : a.value().values()) acc += v;
  const std::size_t ia = a.id();
  return a.tape().record(Tensor::scalar(acc), a.requires_grad(), [ia](Tape& tp, const Tensor& g) {
    auto da = tp.grad(ia).values();
    for (auto& d : da) d += g[0];
  });
}

Var row(Var table, std::size_t i) {
  const Tensor& tv = table.value();
  if (tv.rank() != 2 || i >= tv.rows()) {
    throw ShapeError("row " + std::to_string(i) + " out of range for " + shape_string(tv.shape()));
  }
  auto r = tv.row(i);
  const std::size_t it = table.id();
  const std::size_t width = tv.cols();
  return table.tape().record(Tensor::vector({r.begin(), r.end()}), table.requires_grad(),
                             [it, i, width](Tape& tp, const Tensor& g) {
                               auto dt = tp.grad(it).values();
                               for (std::size_t j = 0; j < width; ++j) dt[i * width + j] += g[j];
                             });
}

Var element(Var v, std::size_t i) {
  if (i >= v.value().size()) throw ShapeError("element index out of range");
  const std::size_t iv = v.id();
  return v.tape().record(Tensor::scalar(v.value()[i]), v.requires_grad(), [iv, i](Tape& tp, const Tensor& g) {
    tp.grad(iv)[i] += g[0];
  });
}

Var weighted_sum(std::span<const Var> vectors, Var weights) {
  if (vectors.empty() || weights.value().size() != vectors.size()) {
    throw ShapeError("weighted_sum: " + std::to_string(vectors.size()) + " vectors vs weights " +
                     shape_string(weights.shape()));
  }
  Tape& t = weights.tape();
  const Shape& shape = vectors.front().shape();
  Tensor y(shape);
  std::vector<std::size_t> ids;
  bool needs = weights.requires_grad();
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    if (vectors[k].shape() != shape) throw ShapeError("weighted_sum: mixed shapes");
    const double w = weights.value()[k];
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += w * vectors[k].value()[i];
    ids.push_back(vectors[k].id());
    needs = needs || vectors[k].requires_grad();
  }
  const std::size_t iw = weights.id();
  return t.record(std::move(y), needs, [ids = std::move(ids), iw](Tape& tp, const Tensor& g) {
    const Tensor& w = tp.value(iw);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const Tensor& v = tp.value(ids[k]);
      if (tp.requires_grad(ids[k])) {
        auto dv = tp.grad(ids[k]).values();
        for (std::size_t i = 0; i < dv.size(); ++i) dv[i] += w[k] * g[i];
      }
      if (tp.requires_grad(iw)) {
        double acc = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * v[i];
        tp.grad(iw)[k] += acc;
      }
    }
  });
}

Var bilinear(Var x, Var W, Var y) {
  Tape& t = same_tape(x, W);
  const Tensor& Wv = W.value();
  if (Wv.rank() != 2 || x.value().size() != Wv.rows() || y.value().size() != Wv.cols()) {
    throw ShapeError("bilinear: x " + shape_string(x.shape()) + ", W " + shape_string(Wv.shape()) +
                     ", y " + shape_string(y.shape()));
  }
  // Wy is kept for the backward pass: d/dx = Wy, d/dy = W^T x, d/dW = x y^T.
  Tensor Wy = kecr::linear(Wv, y.value());
  double acc = 0.0;
  for (std::size_t i = 0; i < Wy.size(); ++i) acc += x.value()[i] * Wy[i];
  const std::size_t ix = x.id(), iW = W.id(), iy = y.id();
  const bool needs = x.requires_grad() || W.requires_grad() || y.requires_grad();
  return t.record(Tensor::scalar(acc), needs, [ix, iW, iy, Wy = std::move(Wy)](Tape& tp, const Tensor& g) {
    const double s = g[0];
    const Tensor& xv = tp.value(ix);
    const Tensor& Wm = tp.value(iW);
    const Tensor& yv = tp.value(iy);
    const std::size_t m = Wm.rows(), n = Wm.cols();
    if (tp.requires_grad(ix)) {
      auto dx = tp.grad(ix).values();
      for (std::size_t i = 0; i < m; ++i) dx[i] += s * Wy[i];
    }
    if (tp.requires_grad(iW)) {
      auto dW = tp.grad(iW).values();
      for (std::size_t i = 0; i < m; ++i) {
        const double sx = s * xv[i];
        if (sx == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) dW[i * n + j] += sx * yv[j];
      }
    }
    if (tp.requires_grad(iy)) {
      auto dy = tp.grad(iy).values();
      for (std::size_t i = 0; i < m; ++i) {
        const double sx = s * xv[i];
        if (sx == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) dy[j] += sx * Wm.values()[i * n + j];
      }
    }
  });
}

Var gru_cell(const GruVars& w, Var h_prev, Var x) {
  Var z = sigmoid(add(linear(w.W_z, x, w.b_z), matvec(w.U_z, h_prev)));
  Var r = sigmoid(add(linear(w.W_r, x, w.b_r), matvec(w.U_r, h_prev)));
  Var c = tanh(add(linear(w.W_h, x, w.b_h), matvec(w.U_h, mul(r, h_prev))));
  return add(mul(z, h_prev), mul(one_minus(z), c));
}

}  // namespace kecr::ad
