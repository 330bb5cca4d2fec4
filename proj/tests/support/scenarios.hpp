// SPDX-License-Identifier: Apache-2.0
// Planted-signal training scenarios with fixed configurations.
#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "json.hpp"

#include "kecr/checkpoint.hpp"
#include "kecr/config.hpp"
#include "kecr/context_encoder.hpp"
#include "kecr/engine.hpp"
#include "kecr/evaluation.hpp"
#include "kecr/mi_pretrainer.hpp"
#include "kecr/model.hpp"
#include "kecr/server.hpp"
#include "kecr/synthetic.hpp"
#include "kecr/trainer.hpp"

#include "http_server.hpp"

namespace kecr::testing {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline std::vector<PreparedConversation> held_out(const DataSplit& split) {
  auto out = split.validation;
  out.insert(out.end(), split.test.begin(), split.test.end());
  return out;
}

// Mutual-information pretraining on entity-specific cue words.

inline Config mi_config() {
  Config cfg;
  cfg.embed_dim = 32;
  cfg.lr = 0.01;
  cfg.pretrain_epochs = 20;
  return cfg;
}

struct MiOutcome {
  std::vector<MIEpochStats> trace;
  MIEpochStats held;
  std::size_t early_decreases = 0;
  double seconds = 0.0;
};

inline MiOutcome run_mi_scenario() {
  Stopwatch clock;
  const Config cfg = mi_config();
  const auto data = planted_mi_corpus(200, 50, 42);
  const auto split = split_corpus(prepare_corpus(data.corpus, data.graph, UtteranceEmbedder(cfg)), cfg.seed);
  ParameterStore store = init_model(data.graph, cfg);
  MiOutcome out;
  out.trace = pretrain(split.train, data.graph, store, cfg);
  for (std::size_t i = 1; i < std::min<std::size_t>(5, out.trace.size()); ++i) {
    if (out.trace[i].mean_objective < out.trace[i - 1].mean_objective) ++out.early_decreases;
  }
  out.held = evaluate_mi(held_out(split), data.graph, store, cfg, 7);
  out.seconds = clock.seconds();
  return out;
}

// Joint training where a cue word fixes the wizard action.

inline Config policy_config() {
  Config cfg;
  cfg.embed_dim = 32;
  cfg.lr = 0.01;
  cfg.pretrain_epochs = 5;
  cfg.joint_epochs = 30;
  cfg.finetune_encoders = true;
  return cfg;
}

struct PolicyOutcome {
  double accuracy = 0.0;
  std::size_t rounds = 0;
  double seconds = 0.0;
};

inline PolicyOutcome run_policy_scenario() {
  Stopwatch clock;
  const Config cfg = policy_config();
  const auto data = planted_policy_corpus(300, 42);
  const auto prepared = prepare_corpus(data.corpus, data.graph, UtteranceEmbedder(cfg));
  auto result = train(prepared, data.graph, cfg);
  const auto split = split_corpus(prepared, cfg.seed);
  const Engine engine(data.graph, cfg, std::move(result.params));
  const auto report = evaluate(engine, split.test);
  return {report.policy_accuracy, report.rounds, clock.seconds()};
}

// Joint training where the gold item is the unique item sharing two
// mentioned attributes.

inline Config reasoner_config() {
  Config cfg = policy_config();
  cfg.norm_mode = NormMode::degree;
  return cfg;
}

struct ReasonerOutcome {
  double step1 = 0.0;
  double recall1 = 0.0;
  double recall10 = 0.0;
  double untrained_step1 = 0.0;
  double untrained_recall1 = 0.0;
  std::size_t reasoning_rounds = 0;
  std::size_t recommend_rounds = 0;
  std::size_t entities = 0;
  double seconds = 0.0;
};

inline ReasonerOutcome run_reasoner_scenario() {
  Stopwatch clock;
  const Config cfg = reasoner_config();
  const auto data = planted_reasoner_corpus(2000, 42);
  const auto prepared = prepare_corpus(data.corpus, data.graph, UtteranceEmbedder(cfg));
  const auto split = split_corpus(prepared, cfg.seed);
  ReasonerOutcome out;
  out.entities = data.base.entity_count();
  {
    const Engine untrained(data.graph, cfg, init_model(data.graph, cfg));
    const auto r0 = evaluate(untrained, split.test);
    out.untrained_step1 = r0.step1_accuracy;
    out.untrained_recall1 = r0.recall_at_1;
  }
  auto result = train(prepared, data.graph, cfg);
  const Engine engine(data.graph, cfg, std::move(result.params));
  const auto report = evaluate(engine, split.test);
  out.step1 = report.step1_accuracy;
  out.recall1 = report.recall_at_1;
  out.recall10 = report.recall_at_10;
  out.reasoning_rounds = report.reasoning_rounds;
  out.recommend_rounds = report.recommend_rounds;
  out.seconds = clock.seconds();
  return out;
}

// Five-entity movie graph served over HTTP.

inline Config toy_config() {
  Config cfg;
  cfg.embed_dim = 16;
  cfg.lr = 0.01;
  cfg.pretrain_epochs = 5;
  cfg.joint_epochs = 60;
  cfg.finetune_encoders = true;
  return cfg;
}

inline constexpr const char* kToyGreeting = "Hi, I am looking for a movie recommendation.";
inline constexpr const char* kToyRequest = "I love horror movies similar to Annabelle";

struct ToyOutcome {
  nlohmann::json greeting;
  nlohmann::json request;
  nlohmann::json transcript;
  std::string checkpoint;
  double seconds = 0.0;
};

inline ParameterStore train_toy(const SyntheticData& data, const Config& cfg) {
  return train(prepare_corpus(data.corpus, data.graph, UtteranceEmbedder(cfg)), data.graph, cfg).params;
}

/// Trains on the toy dialogues, serves the model and plays one session.
inline ToyOutcome run_toy_session() {
  Stopwatch clock;
  const Config cfg = toy_config();
  const auto data = toy_scenario(50, 42);
  ParameterStore params = train_toy(data, cfg);
  ToyOutcome out;
  out.checkpoint = checkpoint_to_string(cfg, params);
  const Engine engine(data.graph, cfg, std::move(params));
  SessionManager sessions(engine);
  BackgroundServer server([&](httplib::Server& s) { register_routes(s, sessions); });
  auto client = server.client();
  auto post = [&](const std::string& path, const nlohmann::json& body) {
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res || res->status != 200) throw std::runtime_error("request to " + path + " failed");
    return nlohmann::json::parse(res->body);
  };
  const std::string id = post("/session", nlohmann::json::object())["session_id"];
  out.greeting = post("/session/" + id + "/utterance", {{"text", kToyGreeting}});
  out.request = post("/session/" + id + "/utterance", {{"text", kToyRequest}});
  auto res = client.Get("/session/" + id);
  if (!res || res->status != 200) throw std::runtime_error("transcript request failed");
  out.transcript = nlohmann::json::parse(res->body);
  out.seconds = clock.seconds();
  return out;
}

}  // namespace kecr::testing
