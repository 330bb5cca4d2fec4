// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kecr/autodiff.hpp"
#include "kecr/config.hpp"
#include "kecr/corpus.hpp"
#include "kecr/ids.hpp"
#include "kecr/numerics.hpp"
#include "kecr/params.hpp"

namespace kecr {

/// Frozen hashed-token utterance encoder. Each bucket row is a fixed
/// function of (seed, bucket), uniform on [-1, 1], so the table is never
/// materialized or stored.
class UtteranceEmbedder {
 public:
  UtteranceEmbedder(std::size_t dim, std::size_t buckets, std::uint64_t seed);
  UtteranceEmbedder(const Config& cfg);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t buckets() const noexcept { return buckets_; }

  std::size_t bucket(std::string_view token) const;
  Tensor row(std::size_t bucket) const;
  Tensor token_embedding(std::string_view token) const { return row(bucket(token)); }

  /// Mean of token rows; zero vector when there are no tokens.
  Tensor embed_tokens(const std::vector<std::string>& tokens) const;
  Tensor embed_utterance(std::string_view text) const;
  /// System utterance and user utterance of one round, joined by a separator token.
  Tensor embed_round(std::string_view system_text, std::string_view user_text) const;

 private:
  std::size_t dim_;
  std::size_t buckets_;
  std::uint64_t seed_;
};

inline constexpr std::string_view kSeparatorToken = "<sep>";

struct DialogueState {
  Tensor q;
  /// Belief state: mentioned entities in chronological order with their embeddings.
  std::vector<EntityId> mentioned;
  std::vector<Tensor> belief;
  /// Nonempty mention groups, one per update_belief call that added entities.
  std::vector<std::vector<EntityId>> mention_groups;
  std::optional<Action> last_action;
  std::size_t round = 0;

  static DialogueState initial(std::size_t dim);
};

// Parameter names: context.gru.{Wz,Uz,bz,Wr,Ur,br,Wh,Uh,bh}.
void init_context_encoder(ParameterStore& store, const Config& cfg, Rng& rng);
GruWeights gru_weights(const ParameterStore& store);
ad::GruVars gru_vars(ad::Tape& tape, ParameterStore& store, bool requires_grad = true);

/// q <- GRU(q, x); round advances.
DialogueState advance_context(DialogueState state, const GruWeights& gru, const Tensor& x);

/// Appends each entity and its embedding row, repeats included, and records
/// them as the latest mention group. No-op for an empty list.
DialogueState update_belief(DialogueState state, const std::vector<EntityId>& entities, const Tensor& embeddings);

/// Stacks belief rows into a [d x E] matrix.
Tensor belief_matrix(const DialogueState& state);

}  // namespace kecr
