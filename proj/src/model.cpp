// SPDX-License-Identifier: Apache-2.0
#include "kecr/model.hpp"

#include "kecr/graph_encoder.hpp"
#include "kecr/kg.hpp"
#include "kecr/mi_pretrainer.hpp"
#include "kecr/policy.hpp"
#include "kecr/preference.hpp"
#include "kecr/reasoner.hpp"

namespace kecr {

ParameterStore init_model(const KnowledgeGraph& g, const Config& cfg) {
  cfg.validate();
  ParameterStore store;
  Rng rng(mix_seed(cfg.seed, 0x696e6974ULL));
  init_graph_encoder(store, g, cfg, rng);
  init_context_encoder(store, cfg, rng);
  init_mi_classifier(store, cfg, rng);
  init_policy(store, cfg, rng);
  init_preference(store, cfg, rng);
  init_reasoner(store, cfg, rng);
  return store;
}

std::vector<PreparedConversation> prepare_corpus(const std::vector<ConversationRecord>& corpus,
                                                 const KnowledgeGraph& g, const UtteranceEmbedder& embedder) {
  std::vector<PreparedConversation> out;
  out.reserve(corpus.size());
  for (const auto& rec : corpus) {
    PreparedConversation conv;
    conv.record = derive_action_labels(rec, g);
    conv.rounds = segment_rounds(conv.record);
    for (const auto& r : conv.rounds) conv.inputs.push_back(embedder.embed_round(r.system_text, r.user_text));
    conv.labels = derive_reasoning_labels(conv.record, g);
    out.push_back(std::move(conv));
  }
  return out;
}

std::vector<Tensor> unroll_contexts(const PreparedConversation& conv, const GruWeights& gru) {
  std::vector<Tensor> qs;
  if (conv.inputs.empty()) return qs;
  Tensor q(conv.inputs.front().shape());
  for (const auto& x : conv.inputs) {
    q = gru_cell(gru, q, x);
    qs.push_back(q);
  }
  return qs;
}

}  // namespace kecr
