// SPDX-License-Identifier: Apache-2.0
#include <set>

#include "doctest.h"

#include "kecr/checkpoint.hpp"
#include "kecr/errors.hpp"
#include "kecr/trainer.hpp"

#include "fixtures.hpp"
#include "scenarios.hpp"

using namespace kecr;

namespace {

Config quick_config() {
  Config cfg = testing::toy_config();
  cfg.embed_dim = 8;
  cfg.pretrain_epochs = 2;
  cfg.joint_epochs = 4;
  return cfg;
}

std::vector<PreparedConversation> toy_prepared(const Config& cfg, std::size_t n = 20) {
  const auto data = toy_scenario(n, 42);
  return prepare_corpus(data.corpus, data.graph, UtteranceEmbedder(cfg));
}

}  // namespace

TEST_SUITE("trainer") {
  TEST_CASE("split sizes and disjointness") {
    const auto prepared = toy_prepared(quick_config(), 50);
    const auto split = split_corpus(prepared, 42);
    CHECK(split.validation.size() == 5);
    CHECK(split.test.size() == 5);
    CHECK(split.train.size() == 40);
    std::set<std::string> ids;
    for (const auto* part : {&split.train, &split.validation, &split.test}) {
      for (const auto& c : *part) ids.insert(c.record.id);
    }
    CHECK(ids.size() == 50);
    const auto again = split_corpus(prepared, 42);
    for (std::size_t i = 0; i < split.test.size(); ++i) CHECK(again.test[i].record.id == split.test[i].record.id);
  }

  TEST_CASE("labeled rounds carry targets and labels") {
    const auto prepared = toy_prepared(quick_config(), 4);
    const auto rounds = labeled_rounds(prepared);
    // Even dialogues: query, recommend, chat; odd dialogues: recommend, chat.
    CHECK(rounds.size() == 3 + 2 + 3 + 2);
    std::size_t with_label = 0;
    for (const auto& r : rounds) {
      if (r.label) {
        ++with_label;
        CHECK(r.label->action == r.target);
      }
    }
    CHECK(with_label >= 4);
  }

  TEST_CASE("zero epochs return the initialization") {
    Config cfg = quick_config();
    cfg.pretrain_epochs = 0;
    cfg.joint_epochs = 0;
    const auto data = toy_scenario(20, 42);
    const auto result = train(prepare_corpus(data.corpus, data.graph, UtteranceEmbedder(cfg)), data.graph, cfg);
    CHECK(result.params.same_values(init_model(data.graph, cfg)));
    CHECK(result.pretrain_trace.empty());
    CHECK(result.joint_trace.empty());
  }

  TEST_CASE("no labeled rounds is a training error") {
    const Config cfg = quick_config();
    const auto data = toy_scenario(4, 42);
    auto prepared = prepare_corpus(data.corpus, data.graph, UtteranceEmbedder(cfg));
    for (auto& c : prepared) {
      for (auto& r : c.rounds) r.target.reset();
    }
    ParameterStore store = init_model(data.graph, cfg);
    CHECK_THROWS_AS(train_joint(prepared, {}, data.graph, store, cfg), TrainingError);
    CHECK_THROWS_AS(train_joint({}, {}, data.graph, store, cfg), TrainingError);
  }

  TEST_CASE("identical inputs give identical checkpoints") {
    const Config cfg = quick_config();
    const auto data = toy_scenario(20, 42);
    const auto a = testing::train_toy(data, cfg);
    const auto b = testing::train_toy(data, cfg);
    CHECK(checkpoint_to_string(cfg, a) == checkpoint_to_string(cfg, b));
    Config other = cfg;
    other.seed = 7;
    CHECK(checkpoint_to_string(cfg, a) != checkpoint_to_string(cfg, testing::train_toy(data, other)));
  }

  TEST_CASE("joint loss falls on the toy dialogues") {
    Config cfg = quick_config();
    cfg.joint_epochs = 8;
    cfg.patience = 0;
    const auto prepared = toy_prepared(cfg, 30);
    const auto g = expand_graph(toy_graph());
    ParameterStore store = init_model(g, cfg);
    const double before = joint_loss(prepared, g, store, cfg);
    const auto trace = train_joint(prepared, {}, g, store, cfg);
    REQUIRE(trace.size() == 8);
    CHECK(trace.back().train_loss < trace.front().train_loss);
    CHECK(joint_loss(prepared, g, store, cfg) < before);
  }

  TEST_CASE("frozen encoders stay fixed during the joint phase") {
    Config cfg = quick_config();
    cfg.joint_epochs = 2;
    cfg.finetune_encoders = false;
    const auto prepared = toy_prepared(cfg, 10);
    const auto g = expand_graph(toy_graph());
    ParameterStore store = init_model(g, cfg);
    const ParameterStore before = store;
    train_joint(prepared, {}, g, store, cfg);
    for (const auto& [name, p] : store) {
      const bool encoder = name.rfind("graph.", 0) == 0 || name.rfind("context.", 0) == 0 || name.rfind("mi.", 0) == 0;
      if (encoder) CHECK(p.value == before.value(name));
    }
    CHECK(store.value("policy.W1") != before.value("policy.W1"));
  }

  TEST_CASE("fine-tuning updates the graph and context encoders") {
    Config cfg = quick_config();
    cfg.joint_epochs = 2;
    cfg.finetune_encoders = true;
    const auto prepared = toy_prepared(cfg, 10);
    const auto g = expand_graph(toy_graph());
    ParameterStore store = init_model(g, cfg);
    const ParameterStore before = store;
    train_joint(prepared, {}, g, store, cfg);
    bool graph_moved = false, context_moved = false;
    for (const auto& [name, p] : store) {
      const bool moved = !(p.value == before.value(name));
      if (name.rfind("graph.", 0) == 0) graph_moved = graph_moved || moved;
      if (name.rfind("context.", 0) == 0) context_moved = context_moved || moved;
    }
    CHECK(graph_moved);
    CHECK(context_moved);
  }

  TEST_CASE("trace files") {
    testing::TempDir dir("trainer");
    std::vector<JointEpochStats> trace = {{1, 2.5, 2.0, 0.5}};
    write_joint_trace(dir / "joint.csv", trace);
    const std::string text = testing::read_file(dir / "joint.csv");
    CHECK(text.rfind("epoch,train_loss,validation_loss,train_action_accuracy\n", 0) == 0);
    CHECK(text.find("\n1,") != std::string::npos);
  }
}
