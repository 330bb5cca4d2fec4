// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "kecr/autodiff.hpp"
#include "kecr/config.hpp"
#include "kecr/ids.hpp"
#include "kecr/model.hpp"
#include "kecr/params.hpp"

namespace kecr {

class KnowledgeGraph;

// Classifier g(e, q) = sigmoid(w2 tanh(W1 [e; q] + b1) + b2).
// Parameter names: mi.W1 [d x 2d], mi.b1 [d], mi.w2 [1 x d], mi.b2 [1].
void init_mi_classifier(ParameterStore& store, const Config& cfg, Rng& rng);
double mi_classifier(const ParameterStore& store, const Tensor& e, const Tensor& q);
ad::Var mi_classifier(ad::Tape& tape, ParameterStore& store, ad::Var e, ad::Var q, bool requires_grad = true);

inline constexpr double kLogClamp = 1e-12;

/// mean log g(pos) + mean log(1 - g(neg)), outputs clamped to [eps, 1 - eps].
/// This is the objective to maximize; it is never positive.
double mi_objective(const std::vector<double>& pos, const std::vector<double>& neg);
ad::Var mi_objective(ad::Tape& tape, const std::vector<ad::Var>& pos, const std::vector<ad::Var>& neg);

/// One (entity, round) pairing. `conversation` and `round` index into the
/// prepared corpus.
struct MIPair {
  EntityId entity;
  std::size_t conversation = 0;
  std::size_t round = 0;
};

struct MIBatch {
  std::vector<MIPair> positives;
  std::vector<MIPair> negatives;
};

/// Every (round, distinct mentioned entity) pair becomes a positive with
/// `neg_samples` negatives drawn uniformly without replacement from entities
/// absent from that round. Rounds are shuffled under `seed` and grouped
/// `batch_rounds` at a time. Throws SamplingError when the entity universe
/// is smaller than neg_samples + 1.
std::vector<MIBatch> build_mi_batches(const std::vector<PreparedConversation>& corpus, const KnowledgeGraph& g,
                                      std::size_t batch_rounds, std::size_t neg_samples, std::uint64_t seed);

/// Objective of one batch given precomputed entity embeddings and per-round
/// contexts (contexts[conversation][round]).
double mi_loss(const ParameterStore& store, const MIBatch& batch, const Tensor& embeddings,
               const std::vector<std::vector<Tensor>>& contexts);

struct MIEpochStats {
  std::size_t epoch = 0;
  double mean_objective = 0.0;
  double pos_mean_g = 0.0;
  double neg_mean_g = 0.0;
};

/// Trains graph encoder, GRU and classifier for cfg.pretrain_epochs epochs.
/// The utterance embedder is frozen and not part of the store.
std::vector<MIEpochStats> pretrain(const std::vector<PreparedConversation>& corpus, const KnowledgeGraph& g,
                                   ParameterStore& store, const Config& cfg);

/// Held-out statistics with the current parameters (no update).
MIEpochStats evaluate_mi(const std::vector<PreparedConversation>& corpus, const KnowledgeGraph& g,
                         const ParameterStore& store, const Config& cfg, std::uint64_t seed);

void write_mi_trace(const std::filesystem::path& path, const std::vector<MIEpochStats>& trace);

}  // namespace kecr
