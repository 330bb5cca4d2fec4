// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "kecr/config.hpp"
#include "kecr/context_encoder.hpp"
#include "kecr/corpus.hpp"
#include "kecr/params.hpp"

namespace kecr {

class KnowledgeGraph;

/// Creates every trainable tensor (graph encoder, GRU, MI classifier,
/// policy, preference attention, relevance scorer) from cfg.seed.
ParameterStore init_model(const KnowledgeGraph& g, const Config& cfg);

/// A labeled conversation with its rounds and their frozen round embeddings.
struct PreparedConversation {
  ConversationRecord record;
  std::vector<Round> rounds;
  std::vector<Tensor> inputs;
  std::vector<ReasoningLabel> labels;
};

/// Derives action and reasoning labels and embeds every round.
std::vector<PreparedConversation> prepare_corpus(const std::vector<ConversationRecord>& corpus,
                                                 const KnowledgeGraph& g, const UtteranceEmbedder& embedder);

/// Contexts q_1..q_T of one conversation (q after consuming each round).
std::vector<Tensor> unroll_contexts(const PreparedConversation& conv, const GruWeights& gru);

}  // namespace kecr
