// SPDX-License-Identifier: Apache-2.0
#include "kecr/graph_encoder.hpp"

#include <cmath>
#include <map>
#include <functional>
#include <optional>

#include "kecr/errors.hpp"
#include "kecr/kg.hpp"
#include "kecr/numerics.hpp"

namespace kecr {

std::string graph_base_name() { return "graph.base"; }
std::string graph_self_name(std::size_t layer) { return "graph.W0.l" + std::to_string(layer); }
std::string graph_relation_name(std::size_t layer, RelationId r) {
  return "graph.W.l" + std::to_string(layer) + ".r" + std::to_string(r.value);
}

void init_graph_encoder(ParameterStore& store, const KnowledgeGraph& g, const Config& cfg, Rng& rng) {
  const std::size_t d = cfg.embed_dim;
  // An embedding lookup has fan-in 1, so the base table spans [-1, 1].
  store.add_uniform(graph_base_name(), {g.entity_count(), d}, 1, rng);
  for (std::size_t l = 0; l < cfg.rgcn_layers; ++l) {
    store.add_uniform(graph_self_name(l), {d, d}, d, rng);
    for (std::size_t r = 0; r < g.relation_count(); ++r) {
      store.add_uniform(graph_relation_name(l, RelationId{static_cast<std::uint32_t>(r)}), {d, d}, d, rng);
    }
  }
}

namespace {

struct LayerWeights {
  const Tensor* self = nullptr;
  std::vector<const Tensor*> rel;
};

std::vector<LayerWeights> collect_weights(const KnowledgeGraph& g, const ParameterStore& store,
                                          const Config& cfg) {
  if (!store.contains(graph_base_name())) throw ConfigError("missing parameter " + graph_base_name());
  const Tensor& base = store.value(graph_base_name());
  if (base.rank() != 2 || base.rows() != g.entity_count()) {
    throw ConfigError("graph.base " + shape_string(base.shape()) + " does not match " +
                      std::to_string(g.entity_count()) + " entities");
  }
  const std::size_t d = base.cols();
  std::vector<LayerWeights> out(cfg.rgcn_layers);
  for (std::size_t l = 0; l < cfg.rgcn_layers; ++l) {
    if (!store.contains(graph_self_name(l))) throw ConfigError("missing parameter " + graph_self_name(l));
    out[l].self = &store.value(graph_self_name(l));
    for (std::size_t r = 0; r < g.relation_count(); ++r) {
      const std::string name = graph_relation_name(l, RelationId{static_cast<std::uint32_t>(r)});
      if (!store.contains(name)) {
        throw ConfigError("relation '" + g.relation(RelationId{static_cast<std::uint32_t>(r)}).name +
                          "' has no weight matrix " + name);
      }
      out[l].rel.push_back(&store.value(name));
    }
    for (const Tensor* w : out[l].rel) {
      if (w->shape() != Shape{d, d}) throw ShapeError("relation weight must be " + shape_string({d, d}));
    }
    if (out[l].self->shape() != Shape{d, d}) throw ShapeError("self weight must be " + shape_string({d, d}));
  }
  return out;
}

/// Neighbor weight for each position of the sorted neighbor list of v.
std::vector<double> coefficients(std::span<const Neighbor> nbrs, NormMode norm) {
  std::vector<double> c(nbrs.size(), 1.0);
  if (norm == NormMode::constant) return c;
  for (std::size_t i = 0; i < nbrs.size();) {
    std::size_t j = i;
    while (j < nbrs.size() && nbrs[j].relation == nbrs[i].relation) ++j;
    const double w = 1.0 / static_cast<double>(j - i);
    for (std::size_t k = i; k < j; ++k) c[k] = w;
    i = j;
  }
  return c;
}

// Shared per-row kernel: both the full table and the single-entity path go
// through it, so their sums are formed in the same order.
template <typename SelfFn, typename MsgFn>
Tensor preactivation(const KnowledgeGraph& g, NormMode norm, EntityId v, SelfFn&& self_term, MsgFn&& message) {
  Tensor acc = self_term(v);
  const auto nbrs = g.neighbors(v);
  const auto coef = coefficients(nbrs, norm);
  for (std::size_t k = 0; k < nbrs.size(); ++k) {
    const Tensor& m = message(nbrs[k].relation, nbrs[k].entity);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += coef[k] * m[i];
  }
  return acc;
}

Tensor row_of(const Tensor& table, std::size_t r) {
  auto span = table.row(r);
  return Tensor::vector(std::vector<double>(span.begin(), span.end()));
}

/// One full layer: returns the activated table.
Tensor layer_forward(const KnowledgeGraph& g, const LayerWeights& w, NormMode norm, const Tensor& H) {
  const std::size_t n = H.rows();
  const std::size_t d = H.cols();
  std::vector<std::vector<std::optional<Tensor>>> cache(w.rel.size(), std::vector<std::optional<Tensor>>(n));
  Tensor out({n, d});
  for (std::size_t v = 0; v < n; ++v) {
    Tensor pre = preactivation(
        g, norm, EntityId{static_cast<std::uint32_t>(v)},
        [&](EntityId x) { return linear(*w.self, row_of(H, x.index())); },
        [&](RelationId r, EntityId u) -> const Tensor& {
          auto& slot = cache[r.index()][u.index()];
          if (!slot) slot = linear(*w.rel[r.index()], row_of(H, u.index()));
          return *slot;
        });
    for (std::size_t i = 0; i < d; ++i) out.at(v, i) = sigmoid(pre[i]);
  }
  return out;
}

}  // namespace

Tensor encode_entities(const KnowledgeGraph& g, const ParameterStore& store, const Config& cfg) {
  const auto weights = collect_weights(g, store, cfg);
  Tensor H = store.value(graph_base_name());
  for (const auto& w : weights) H = layer_forward(g, w, cfg.norm_mode, H);
  return H;
}

Tensor encode_entity(const KnowledgeGraph& g, const ParameterStore& store, const Config& cfg, EntityId v) {
  g.entity(v);
  const auto weights = collect_weights(g, store, cfg);
  const Tensor& base = store.value(graph_base_name());
  std::map<std::pair<std::size_t, std::uint32_t>, Tensor> memo;

  // Row u at layer l (layer 0 is the base table).
  std::function<const Tensor&(std::size_t, EntityId)> at_layer = [&](std::size_t l, EntityId u) -> const Tensor& {
    auto key = std::pair(l, u.value);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    Tensor row;
    if (l == 0) {
      row = row_of(base, u.index());
    } else {
      const LayerWeights& w = weights[l - 1];
      Tensor message;
      Tensor pre = preactivation(
          g, cfg.norm_mode, u, [&](EntityId x) { return linear(*w.self, at_layer(l - 1, x)); },
          [&](RelationId r, EntityId x) -> const Tensor& {
            message = linear(*w.rel[r.index()], at_layer(l - 1, x));
            return message;
          });
      row = Tensor(pre.shape());
      for (std::size_t i = 0; i < pre.size(); ++i) row[i] = sigmoid(pre[i]);
    }
    return memo.emplace(key, std::move(row)).first->second;
  };
  return at_layer(weights.size(), v);
}

namespace {

ad::Var rgcn_layer(ad::Tape& tape, const KnowledgeGraph& g, NormMode norm, ad::Var H, ad::Var W0,
                   const std::vector<ad::Var>& Ws) {
  LayerWeights w;
  w.self = &W0.value();
  bool needs = H.requires_grad() || W0.requires_grad();
  for (const auto& v : Ws) {
    w.rel.push_back(&v.value());
    needs = needs || v.requires_grad();
  }
  Tensor out = layer_forward(g, w, norm, H.value());
  const std::size_t ih = H.id(), iw0 = W0.id();
  std::vector<std::size_t> iws;
  for (const auto& v : Ws) iws.push_back(v.id());
  const std::size_t out_id = tape.size();
  return tape.record(std::move(out), needs, [&g, norm, ih, iw0, iws, out_id](ad::Tape& tp, const Tensor& grad) {
    const Tensor& Hv = tp.value(ih);
    const Tensor& Y = tp.value(out_id);
    const std::size_t n = Hv.rows(), d = Hv.cols();
    Tensor dA({n, d});
    for (std::size_t k = 0; k < dA.size(); ++k) dA[k] = grad[k] * Y[k] * (1.0 - Y[k]);

    const bool gh = tp.requires_grad(ih);
    auto back_matvec = [&](std::size_t iw, std::span<const double> upstream, double c, std::size_t src) {
      const Tensor& W = tp.value(iw);
      if (tp.requires_grad(iw)) {
        auto dW = tp.grad(iw).values();
        for (std::size_t i = 0; i < d; ++i) {
          const double gi = c * upstream[i];
          if (gi == 0.0) continue;
          for (std::size_t j = 0; j < d; ++j) dW[i * d + j] += gi * Hv.at(src, j);
        }
      }
      if (gh) {
        auto dH = tp.grad(ih).values();
        for (std::size_t i = 0; i < d; ++i) {
          const double gi = c * upstream[i];
          if (gi == 0.0) continue;
          for (std::size_t j = 0; j < d; ++j) dH[src * d + j] += gi * W.at(i, j);
        }
      }
    };
    for (std::size_t v = 0; v < n; ++v) {
      auto up = dA.row(v);
      back_matvec(iw0, up, 1.0, v);
      const auto nbrs = g.neighbors(EntityId{static_cast<std::uint32_t>(v)});
      const auto coef = coefficients(nbrs, norm);
      for (std::size_t k = 0; k < nbrs.size(); ++k) {
        back_matvec(iws[nbrs[k].relation.index()], up, coef[k], nbrs[k].entity.index());
      }
    }
  });
}

}  // namespace

ad::Var encode_entities(ad::Tape& tape, const KnowledgeGraph& g, ParameterStore& store, const Config& cfg,
                        bool requires_grad) {
  collect_weights(g, store, cfg);
  ad::Var H = tape.param(store, graph_base_name(), requires_grad);
  for (std::size_t l = 0; l < cfg.rgcn_layers; ++l) {
    ad::Var W0 = tape.param(store, graph_self_name(l), requires_grad);
    std::vector<ad::Var> Ws;
    for (std::size_t r = 0; r < g.relation_count(); ++r) {
      Ws.push_back(tape.param(store, graph_relation_name(l, RelationId{static_cast<std::uint32_t>(r)}), requires_grad));
    }
    H = rgcn_layer(tape, g, cfg.norm_mode, H, W0, Ws);
  }
  return H;
}

}  // namespace kecr
