// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "kecr/autodiff.hpp"
#include "kecr/config.hpp"
#include "kecr/ids.hpp"
#include "kecr/params.hpp"

namespace kecr {

class KnowledgeGraph;

// Parameter names: graph.base [N x d], graph.W0.l{l} [d x d],
// graph.W.l{l}.r{r} [d x d] for every relation r of the graph.
std::string graph_base_name();
std::string graph_self_name(std::size_t layer);
std::string graph_relation_name(std::size_t layer, RelationId r);

void init_graph_encoder(ParameterStore& store, const KnowledgeGraph& g, const Config& cfg, Rng& rng);

/// Relational graph convolution:
///   e_v^{l+1} = sigmoid( sum_r sum_{u in N_r(v)} c_{v,r} W_r^l e_u^l + W_0^l e_v^l )
/// with c = 1 or 1/|N_r(v)|. Returns the final layer, one row per entity.
/// Throws ConfigError when a relation of the graph has no weight matrix.
Tensor encode_entities(const KnowledgeGraph& g, const ParameterStore& store, const Config& cfg);

/// Row v of encode_entities, computed from v's neighborhood only. Bit-identical
/// to the full table.
Tensor encode_entity(const KnowledgeGraph& g, const ParameterStore& store, const Config& cfg, EntityId v);

/// Tape version of encode_entities; gradients reach the base table and all
/// weight matrices (when `requires_grad`).
ad::Var encode_entities(ad::Tape& tape, const KnowledgeGraph& g, ParameterStore& store, const Config& cfg,
                        bool requires_grad = true);

}  // namespace kecr
