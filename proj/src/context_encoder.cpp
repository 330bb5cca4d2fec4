// SPDX-License-Identifier: Apache-2.0
#include "kecr/context_encoder.hpp"

#include "kecr/errors.hpp"
#include "kecr/rng.hpp"
#include "kecr/text.hpp"

namespace kecr {

namespace {
constexpr std::uint64_t kEmbedderStream = 0x7574746572616e63ULL;
}

UtteranceEmbedder::UtteranceEmbedder(std::size_t dim, std::size_t buckets, std::uint64_t seed)
    : dim_(dim), buckets_(buckets), seed_(seed) {
  if (dim == 0 || buckets == 0) throw ConfigError("utterance embedder needs positive dim and buckets");
}

UtteranceEmbedder::UtteranceEmbedder(const Config& cfg)
    : UtteranceEmbedder(cfg.embed_dim, cfg.hash_buckets, mix_seed(cfg.seed, kEmbedderStream)) {}

std::size_t UtteranceEmbedder::bucket(std::string_view token) const { return fnv1a64(token) % buckets_; }

Tensor UtteranceEmbedder::row(std::size_t bucket) const {
  Rng rng(mix_seed(seed_, bucket));
  Tensor r({dim_});
  for (auto& v : r.values()) v = rng.uniform(-1.0, 1.0);
  return r;
}

Tensor UtteranceEmbedder::embed_tokens(const std::vector<std::string>& tokens) const {
  Tensor sum({dim_});
  if (tokens.empty()) return sum;
  for (const auto& tok : tokens) {
    const Tensor r = token_embedding(tok);
    for (std::size_t i = 0; i < dim_; ++i) sum[i] += r[i];
  }
  const double n = static_cast<double>(tokens.size());
  for (auto& v : sum.values()) v /= n;
  return sum;
}

Tensor UtteranceEmbedder::embed_utterance(std::string_view text) const { return embed_tokens(tokenize(text)); }

Tensor UtteranceEmbedder::embed_round(std::string_view system_text, std::string_view user_text) const {
  auto tokens = tokenize(system_text);
  tokens.emplace_back(kSeparatorToken);
  for (auto& t : tokenize(user_text)) tokens.push_back(std::move(t));
  return embed_tokens(tokens);
}

DialogueState DialogueState::initial(std::size_t dim) {
  DialogueState s;
  s.q = Tensor({dim});
  return s;
}

namespace {
constexpr const char* kGruNames[] = {"Wz", "Uz", "bz", "Wr", "Ur", "br", "Wh", "Uh", "bh"};

std::string gru_name(const char* part) { return std::string("context.gru.") + part; }
}  // namespace

void init_context_encoder(ParameterStore& store, const Config& cfg, Rng& rng) {
  const std::size_t d = cfg.embed_dim;
  for (const char* part : kGruNames) {
    const bool bias = part[0] == 'b';
    store.add_uniform(gru_name(part), bias ? Shape{d} : Shape{d, d}, d, rng);
  }
}

GruWeights gru_weights(const ParameterStore& store) {
  auto v = [&](const char* part) { return store.value(gru_name(part)); };
  return GruWeights{v("Wz"), v("Uz"), v("bz"), v("Wr"), v("Ur"), v("br"), v("Wh"), v("Uh"), v("bh")};
}

ad::GruVars gru_vars(ad::Tape& tape, ParameterStore& store, bool requires_grad) {
  auto p = [&](const char* part) { return tape.param(store, gru_name(part), requires_grad); };
  return ad::GruVars{p("Wz"), p("Uz"), p("bz"), p("Wr"), p("Ur"), p("br"), p("Wh"), p("Uh"), p("bh")};
}

DialogueState advance_context(DialogueState state, const GruWeights& gru, const Tensor& x) {
  if (x.size() != state.q.size() || gru.U_z.cols() != state.q.size() || gru.W_z.cols() != x.size()) {
    throw ShapeError("advance_context: q " + shape_string(state.q.shape()) + ", x " + shape_string(x.shape()) +
                     ", W_z " + shape_string(gru.W_z.shape()));
  }
  state.q = gru_cell(gru, state.q, x);
  ++state.round;
  return state;
}

DialogueState update_belief(DialogueState state, const std::vector<EntityId>& entities, const Tensor& embeddings) {
  if (entities.empty()) return state;
  for (auto e : entities) {
    if (e.index() >= embeddings.rows()) {
      throw NotFoundError("entity id " + std::to_string(e.value) + " has no embedding row");
    }
  }
  for (auto e : entities) {
    auto r = embeddings.row(e.index());
    state.mentioned.push_back(e);
    state.belief.push_back(Tensor::vector(std::vector<double>(r.begin(), r.end())));
  }
  state.mention_groups.push_back(entities);
  return state;
}

Tensor belief_matrix(const DialogueState& state) {
  if (state.belief.empty()) throw EmptyBeliefError();
  const std::size_t d = state.belief.front().size();
  Tensor D({d, state.belief.size()});
  for (std::size_t j = 0; j < state.belief.size(); ++j) {
    for (std::size_t i = 0; i < d; ++i) D.at(i, j) = state.belief[j][i];
  }
  return D;
}

}  // namespace kecr
