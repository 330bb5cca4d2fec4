// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "kecr/config.hpp"
#include "kecr/context_encoder.hpp"
#include "kecr/kg.hpp"
#include "kecr/params.hpp"
#include "kecr/realizer.hpp"
#include "kecr/reasoner.hpp"
#include "kecr/text.hpp"

namespace kecr {

/// Outcome of one system turn.
struct Decision {
  Action action = Action::chat;
  /// Action probabilities from the policy (query, recommend, chat).
  Tensor probs;
  std::optional<EntityId> start;
  std::optional<ScoredEntity> step1;
  std::optional<ScoredEntity> step2;
  std::optional<RelationId> relation;
  /// Ranked unmentioned items; for a recommendation step 1 comes first.
  std::vector<ScoredEntity> top_items;
  std::string reply;
  /// "<step1> is <relation phrase> <step2>." for a recommendation with a
  /// second step, empty otherwise.
  std::string explanation;
};

/// Read-only inference over a trained parameter snapshot. Entity embeddings
/// are computed once at construction; all methods are const and safe to call
/// from several threads.
class Engine {
 public:
  Engine(KnowledgeGraph g, Config cfg, ParameterStore params, TemplateSet templates = default_templates(),
         std::string generator_endpoint = {});

  const KnowledgeGraph& graph() const noexcept { return g_; }
  const Config& config() const noexcept { return cfg_; }
  const ParameterStore& params() const noexcept { return params_; }
  const Tensor& embeddings() const noexcept { return E_; }
  const Lexicon& lexicon() const noexcept { return lexicon_; }
  const UtteranceEmbedder& embedder() const noexcept { return embedder_; }
  const GeneratorAdapter& generator() const noexcept { return *generator_; }

  /// Consumes one round: the context advances on x, then the entities join
  /// the belief state.
  DialogueState observe(DialogueState state, const Tensor& x, const std::vector<EntityId>& entities) const;
  Tensor action_probs(const DialogueState& state) const;

  /// Runs preference mining, two-step reasoning, item ranking and surface
  /// realization for a given action. A recommendation whose first step is
  /// not an item is voiced as a query; no path or no fitting template
  /// degrades to chat.
  Decision decide(const DialogueState& state, const Tensor& probs, Action action, std::uint64_t seed) const;

  /// Full turn: links mentions in the previous system reply and the user
  /// text, observes the round, picks the argmax action and decides.
  Decision respond(DialogueState& state, const std::string& system_text, const std::string& user_text,
                   std::uint64_t seed) const;

 private:
  KnowledgeGraph g_;
  Config cfg_;
  ParameterStore params_;
  TemplateSet templates_;
  Lexicon lexicon_;
  UtteranceEmbedder embedder_;
  Tensor E_;
  GruWeights gru_;
  std::unique_ptr<GeneratorAdapter> generator_;
};

/// Loads graph, checkpoint and templates from disk. The checkpoint's config
/// is used unless `cfg_override` is given.
std::unique_ptr<Engine> load_engine(const std::filesystem::path& kg_path, const std::filesystem::path& checkpoint,
                                    const std::optional<std::filesystem::path>& templates = std::nullopt,
                                    const std::optional<Config>& cfg_override = std::nullopt,
                                    const std::string& generator_endpoint = {});

nlohmann::json decision_to_json(const Engine& engine, const Decision& d);

struct TranscriptEntry {
  Speaker speaker = Speaker::seeker;
  std::string text;
  std::optional<Decision> decision;
};

struct Session {
  std::string id;
  std::uint64_t seed = 0;
  DialogueState state;
  std::vector<TranscriptEntry> transcript;
  std::mutex mutex;
};

/// Live sessions over one shared engine. Requests for different sessions run
/// concurrently; requests for one session are serialized by its mutex.
class SessionManager {
 public:
  explicit SessionManager(const Engine& engine) : engine_(engine) {}

  /// New session id "sess-000001", "sess-000002", ...
  std::string create();
  /// Throws NotFoundError for an unknown id.
  nlohmann::json utterance(const std::string& id, const std::string& text);
  nlohmann::json describe(const std::string& id) const;
  /// Returns false when the id is unknown.
  bool close(const std::string& id);
  std::size_t size() const;

 private:
  std::shared_ptr<Session> find(const std::string& id) const;

  const Engine& engine_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_ = 1;
};

/// Seed of a session: derived from its id and the configured seed so a
/// transcript can be replayed.
std::uint64_t session_seed(const std::string& id, std::uint64_t seed);

}  // namespace kecr
