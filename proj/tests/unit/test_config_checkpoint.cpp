// SPDX-License-Identifier: Apache-2.0
#include <string>

#include "doctest.h"

#include "kecr/checkpoint.hpp"
#include "kecr/config.hpp"
#include "kecr/errors.hpp"
#include "kecr/kg.hpp"
#include "kecr/model.hpp"
#include "kecr/synthetic.hpp"

#include "fixtures.hpp"

using namespace kecr;

TEST_SUITE("config") {
  TEST_CASE("defaults") {
    const Config cfg;
    CHECK(cfg.embed_dim == 128);
    CHECK(cfg.rgcn_layers == 1);
    CHECK(cfg.norm_mode == NormMode::constant);
    CHECK(cfg.gamma == 0.95);
    CHECK(cfg.lr == 0.001);
    CHECK(cfg.weight_decay == 0.01);
    CHECK(cfg.batch_pretrain == 10);
    CHECK(cfg.batch_joint == 30);
    CHECK(cfg.neg_samples == 4);
    CHECK_NOTHROW(cfg.validate());
  }

  TEST_CASE("parse with comments and blank lines") {
    const Config cfg = parse_config("# toy\nembed_dim = 16\n\nnorm_mode = degree  # per relation\nfinetune_encoders = true\n");
    CHECK(cfg.embed_dim == 16);
    CHECK(cfg.norm_mode == NormMode::degree);
    CHECK(cfg.finetune_encoders);
  }

  TEST_CASE("bad input") {
    CHECK_THROWS_AS(parse_config("bogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("embed_dim = ten\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("embed_dim\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("gamma = 1.5\n").validate(), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/kecr.cfg"), NotFoundError);
  }

  TEST_CASE("text and JSON round trips") {
    Config cfg;
    cfg.embed_dim = 24;
    cfg.lambda = 0.125;
    cfg.seed = 7;
    cfg.norm_mode = NormMode::degree;
    const Config a = parse_config(format_config(cfg));
    const Config b = config_from_json(config_to_json(cfg));
    for (const Config& c : {a, b}) {
      CHECK(c.embed_dim == 24);
      CHECK(c.lambda == 0.125);
      CHECK(c.seed == 7);
      CHECK(c.norm_mode == NormMode::degree);
    }
  }
}

TEST_SUITE("checkpoint") {
  TEST_CASE("round trip preserves values and bytes") {
    const auto g = expand_graph(toy_graph());
    Config cfg;
    cfg.embed_dim = 4;
    const ParameterStore params = init_model(g, cfg);
    const std::string text = checkpoint_to_string(cfg, params);
    const Checkpoint back = checkpoint_from_string(text);
    CHECK(back.params.same_values(params));
    CHECK(back.config.embed_dim == 4);
    CHECK(checkpoint_to_string(back.config, back.params) == text);
  }

  TEST_CASE("same seed gives the same initialization") {
    const auto g = expand_graph(toy_graph());
    Config cfg;
    cfg.embed_dim = 4;
    CHECK(init_model(g, cfg).same_values(init_model(g, cfg)));
    Config other = cfg;
    other.seed = 43;
    CHECK_FALSE(init_model(g, cfg).same_values(init_model(g, other)));
  }

  TEST_CASE("missing file names the path") {
    try {
      load_checkpoint("/nonexistent/kecr/ck.json");
      FAIL("expected not found");
    } catch (const NotFoundError& e) {
      CHECK(std::string(e.what()).find("/nonexistent/kecr/ck.json") != std::string::npos);
    }
  }

  TEST_CASE("corrupt documents") {
    CHECK_THROWS_AS(checkpoint_from_string("{"), ParseError);
    CHECK_THROWS_AS(checkpoint_from_string("{\"format_version\": 99}"), ParseError);
  }
}
