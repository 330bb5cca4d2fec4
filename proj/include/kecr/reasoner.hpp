// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "kecr/autodiff.hpp"
#include "kecr/config.hpp"
#include "kecr/context_encoder.hpp"
#include "kecr/corpus.hpp"
#include "kecr/ids.hpp"
#include "kecr/params.hpp"

namespace kecr {

class KnowledgeGraph;

// Relevance J(k) = sigmoid(h_k^T W_proj h_c) with h_k = [e_start; e_k] and
// h_c = [a; u; q]. Parameter name: reasoner.Wproj [2d x (3 + 2d)].

void init_reasoner(ParameterStore& store, const Config& cfg, Rng& rng);

Tensor context_vector(const Tensor& a, const Tensor& u, const Tensor& q);
/// Direct evaluation of the bilinear form for one pair.
double relevance(const Tensor& Wproj, const Tensor& e_from, const Tensor& e_to, const Tensor& hc);

struct ScoredEntity {
  EntityId entity;
  double score = 0.0;
};

/// Scores pairs against one fixed context. W_proj h_c is formed once.
class RelevanceScorer {
 public:
  RelevanceScorer(const Tensor& Wproj, const Tensor& embeddings, const Tensor& hc);
  double score(EntityId from, EntityId to) const;
  std::size_t dim() const noexcept { return d_; }

 private:
  const Tensor& embeddings_;
  Tensor projected_;
  std::size_t d_;
};

/// Distinct neighbors of `start`, best score first, ties by id.
/// Throws NoNeighborsError for an isolated start.
std::vector<ScoredEntity> score_neighbors(const RelevanceScorer& scorer, const KnowledgeGraph& g, EntityId start);

/// Uniform pick (under seed) from the latest mention group; a uniform
/// category when nothing was mentioned. Throws CannotStartError.
EntityId pick_start(const DialogueState& state, const KnowledgeGraph& g, std::uint64_t seed);

struct ReasoningResult {
  Action action = Action::chat;
  EntityId start;
  ScoredEntity step1;
  std::optional<ScoredEntity> step2;
  /// Relation from step1 to step2.
  std::optional<RelationId> relation;
  std::vector<ScoredEntity> candidates1;
  std::vector<ScoredEntity> candidates2;
};

/// Step 1 is the best neighbor of the start that fits the action (an
/// unmentioned item for recommend, an attribute or category for query).
/// When the picked start has none, its round-mates are tried, then the kind
/// constraint is relaxed; an isolated start falls back to the categories.
/// Step 2 (recommend only) is the best attribute neighbor of step 1 other
/// than the start. Throws NoPathError when nothing is reachable.
ReasoningResult reason_two_step(const RelevanceScorer& scorer, const KnowledgeGraph& g, const DialogueState& state,
                                Action action, std::uint64_t seed);

/// Unmentioned items within two hops of the start first (best path product
/// of J), then those within two hops of other mentions; every item scored
/// from the start when nothing was mentioned. Best first, ties by id.
std::vector<ScoredEntity> rank_items(const RelevanceScorer& scorer, const KnowledgeGraph& g,
                                     const DialogueState& state, EntityId start, std::size_t k);

/// Negated binary cross-entropy summed over a neighbor set, target 1 for
/// `gold` and 0 for the rest; scores clamped at 1e-12.
double neighbor_bce(const std::vector<ScoredEntity>& scored, EntityId gold);

/// L_r = L_r^1 + lambda L_r^2: step 1 over the start's neighbors, step 2
/// over the first target's neighbors (skipped without a second target).
double reasoning_loss(const RelevanceScorer& scorer, const KnowledgeGraph& g, const ReasoningLabel& label,
                      double lambda);

using RowFn = std::function<ad::Var(EntityId)>;
ad::Var reasoning_loss(ad::Tape& tape, ad::Var Wproj, ad::Var hc, const RowFn& row, const KnowledgeGraph& g,
                       const ReasoningLabel& label, double lambda);

}  // namespace kecr
