// SPDX-License-Identifier: Apache-2.0
#include "kecr/engine.hpp"

#include <algorithm>
#include <cstdio>

#include <spdlog/spdlog.h>

#include "kecr/checkpoint.hpp"
#include "kecr/errors.hpp"
#include "kecr/graph_encoder.hpp"
#include "kecr/policy.hpp"
#include "kecr/preference.hpp"

namespace kecr {

Engine::Engine(KnowledgeGraph g, Config cfg, ParameterStore params, TemplateSet templates,
               std::string generator_endpoint)
    : g_(std::move(g)),
      cfg_(cfg),
      params_(std::move(params)),
      templates_(std::move(templates)),
      lexicon_(g_),
      embedder_(cfg_),
      E_(encode_entities(g_, params_, cfg_)),
      gru_(gru_weights(params_)),
      generator_(std::make_unique<GeneratorAdapter>(generator_endpoint)) {}

DialogueState Engine::observe(DialogueState state, const Tensor& x, const std::vector<EntityId>& entities) const {
  state = advance_context(std::move(state), gru_, x);
  return update_belief(std::move(state), entities, E_);
}

Tensor Engine::action_probs(const DialogueState& state) const {
  return predict_action(policy_params(params_), state.q);
}

namespace {

/// Category word a query asks about: the entity itself when it is a
/// category, else the category it belongs to.
std::optional<EntityId> query_subject(const KnowledgeGraph& g, EntityId e) {
  if (g.kind(e) == EntityKind::category) return e;
  if (auto belong = g.find_relation(kBelongRelation)) {
    auto cats = g.neighbors(e, *belong);
    if (!cats.empty()) return cats.front();
  }
  return std::nullopt;
}

Tensor column_matrix(const Tensor& E, EntityId e) {
  Tensor D({E.cols(), 1});
  for (std::size_t i = 0; i < E.cols(); ++i) D.at(i, 0) = E.at(e.index(), i);
  return D;
}

}  // namespace

Decision Engine::decide(const DialogueState& state, const Tensor& probs, Action action, std::uint64_t seed) const {
  Decision d;
  d.probs = probs;
  d.action = action;
  const std::uint64_t realize_seed = mix_seed(seed, 2);

  auto chat = [&](Decision& out) {
    out.action = Action::chat;
    out.step1.reset();
    out.step2.reset();
    out.relation.reset();
    out.explanation.clear();
    out.reply = realize(templates_, g_, Action::chat, std::nullopt, std::nullopt, std::nullopt, realize_seed);
  };

  EntityId start;
  try {
    start = pick_start(state, g_, seed);
  } catch (const CannotStartError&) {
    chat(d);
    return d;
  }
  const Tensor D = state.belief.empty() ? column_matrix(E_, start) : belief_matrix(state);
  const Tensor u = mine_preference(preference_params(params_), cfg_.gamma, D, cfg_.damping_normalize);
  const RelevanceScorer scorer(params_.value("reasoner.Wproj"), E_, context_vector(probs, u, state.q));

  std::optional<ReasoningResult> path;
  if (action != Action::chat) {
    try {
      path = reason_two_step(scorer, g_, state, action, seed);
    } catch (const NoPathError& e) {
      spdlog::debug("no reasoning path: {}", e.what());
    }
  }
  d.start = path ? path->start : start;
  try {
    d.top_items = rank_items(scorer, g_, state, *d.start, cfg_.top_k);
  } catch (const Error& e) {
    spdlog::debug("item ranking failed: {}", e.what());
  }
  if (action == Action::chat || !path) {
    chat(d);
    return d;
  }

  d.step1 = path->step1;
  if (action == Action::recommend && g_.kind(path->step1.entity) != EntityKind::item) d.action = Action::query;
  try {
    if (d.action == Action::recommend) {
      d.step2 = path->step2;
      d.relation = path->relation;
      std::optional<EntityId> s2;
      if (d.step2) s2 = d.step2->entity;
      d.reply = realize(templates_, g_, Action::recommend, d.step1->entity, s2, d.relation, realize_seed);
      if (d.step2 && d.relation) {
        d.explanation = display_name(g_, d.step1->entity) + " is " + relation_phrase(g_.relation(*d.relation).name) +
                        " " + display_name(g_, d.step2->entity) + ".";
      }
      // The recommended item leads the ranking.
      std::erase_if(d.top_items, [&](const ScoredEntity& s) { return s.entity == d.step1->entity; });
      d.top_items.insert(d.top_items.begin(), *d.step1);
      if (d.top_items.size() > cfg_.top_k) d.top_items.resize(cfg_.top_k);
    } else {
      d.reply = realize(templates_, g_, Action::query, query_subject(g_, d.step1->entity), std::nullopt,
                        std::nullopt, realize_seed);
    }
  } catch (const RealizationError& e) {
    spdlog::warn("{}; answering with chat", e.what());
    chat(d);
  }
  return d;
}

Decision Engine::respond(DialogueState& state, const std::string& system_text, const std::string& user_text,
                         std::uint64_t seed) const {
  std::vector<EntityId> entities = lexicon_.link(system_text);
  const auto user_entities = lexicon_.link(user_text);
  entities.insert(entities.end(), user_entities.begin(), user_entities.end());
  state = observe(std::move(state), embedder_.embed_round(system_text, user_text), entities);
  const Tensor probs = action_probs(state);
  Decision d = decide(state, probs, argmax_action(probs), seed);
  state.last_action = d.action;
  if (generator_->enabled()) {
    std::vector<std::string> names;
    if (d.step1) names.push_back(display_name(g_, d.step1->entity));
    if (d.step2) names.push_back(display_name(g_, d.step2->entity));
    d.reply = generator_->generate(d.action, names, user_text, d.reply);
  }
  return d;
}

std::unique_ptr<Engine> load_engine(const std::filesystem::path& kg_path, const std::filesystem::path& checkpoint,
                                    const std::optional<std::filesystem::path>& templates,
                                    const std::optional<Config>& cfg_override,
                                    const std::string& generator_endpoint) {
  KnowledgeGraph g = load_graph(kg_path);
  Checkpoint ck = load_checkpoint(checkpoint);
  const Config cfg = cfg_override ? *cfg_override : ck.config;
  TemplateSet ts = templates ? load_templates(*templates) : default_templates();
  return std::make_unique<Engine>(std::move(g), cfg, std::move(ck.params), std::move(ts), generator_endpoint);
}

nlohmann::json decision_to_json(const Engine& engine, const Decision& d) {
  const KnowledgeGraph& g = engine.graph();
  nlohmann::json j;
  j["reply"] = d.reply;
  j["action"] = std::string(to_string(d.action));
  if (d.step1) j["step1"] = display_name(g, d.step1->entity);
  if (d.step2) j["step2"] = display_name(g, d.step2->entity);
  if (d.relation) j["relation"] = g.relation(*d.relation).name;
  j["explanation"] = d.explanation;
  auto items = nlohmann::json::array();
  auto scores = nlohmann::json::array();
  for (const auto& s : d.top_items) {
    items.push_back(g.name(s.entity));
    scores.push_back(s.score);
  }
  j["top_k_items"] = std::move(items);
  j["scores"] = std::move(scores);
  return j;
}

std::uint64_t session_seed(const std::string& id, std::uint64_t seed) { return fnv1a64(id) ^ seed; }

std::string SessionManager::create() {
  std::lock_guard lock(mutex_);
  char buf[32];
  std::snprintf(buf, sizeof buf, "sess-%06llu", static_cast<unsigned long long>(next_++));
  auto s = std::make_shared<Session>();
  s->id = buf;
  s->seed = session_seed(s->id, engine_.config().seed);
  s->state = DialogueState::initial(engine_.config().embed_dim);
  sessions_.emplace(s->id, s);
  return s->id;
}

std::shared_ptr<Session> SessionManager::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("unknown session: " + id);
  return it->second;
}

nlohmann::json SessionManager::utterance(const std::string& id, const std::string& text) {
  auto s = find(id);
  std::lock_guard lock(s->mutex);
  std::string system_text;
  if (!s->transcript.empty() && s->transcript.back().speaker == Speaker::wizard) {
    system_text = s->transcript.back().text;
  }
  const std::uint64_t seed = mix_seed(s->seed, s->state.round);
  Decision d = engine_.respond(s->state, system_text, text, seed);
  s->transcript.push_back({Speaker::seeker, text, std::nullopt});
  nlohmann::json j = decision_to_json(engine_, d);
  s->transcript.push_back({Speaker::wizard, d.reply, std::move(d)});
  return j;
}

nlohmann::json SessionManager::describe(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mutex);
  const KnowledgeGraph& g = engine_.graph();
  nlohmann::json j;
  j["session_id"] = s->id;
  auto transcript = nlohmann::json::array();
  for (const auto& t : s->transcript) {
    nlohmann::json entry;
    entry["speaker"] = std::string(to_string(t.speaker));
    entry["text"] = t.text;
    if (t.decision) {
      auto dj = decision_to_json(engine_, *t.decision);
      dj.erase("reply");
      entry.update(dj);
    }
    transcript.push_back(std::move(entry));
  }
  j["transcript"] = std::move(transcript);
  nlohmann::json state;
  state["round"] = s->state.round;
  auto mentioned = nlohmann::json::array();
  for (auto e : s->state.mentioned) mentioned.push_back(g.name(e));
  state["mentioned"] = std::move(mentioned);
  state["last_action"] = s->state.last_action ? nlohmann::json(std::string(to_string(*s->state.last_action)))
                                              : nlohmann::json(nullptr);
  j["state"] = std::move(state);
  return j;
}

bool SessionManager::close(const std::string& id) {
  std::lock_guard lock(mutex_);
  return sessions_.erase(id) > 0;
}

std::size_t SessionManager::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

}  // namespace kecr
