// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "doctest.h"

#include "kecr/config.hpp"
#include "kecr/errors.hpp"
#include "kecr/graph_encoder.hpp"
#include "kecr/kg.hpp"
#include "kecr/rng.hpp"
#include "kecr/synthetic.hpp"

using namespace kecr;

namespace {

struct Tiny {
  KnowledgeGraph g;
  EntityId a, b, c;
  RelationId r;
};

// A -r-> B, A -r-> C, with B and C created in the given order.
Tiny tiny(bool swap) {
  Tiny t;
  t.r = t.g.add_relation("Genre");
  t.a = t.g.add_entity("A", EntityKind::item);
  if (swap) {
    t.c = t.g.add_entity("C", EntityKind::attribute);
    t.b = t.g.add_entity("B", EntityKind::attribute);
  } else {
    t.b = t.g.add_entity("B", EntityKind::attribute);
    t.c = t.g.add_entity("C", EntityKind::attribute);
  }
  t.g.add_triple(t.a, t.r, t.b);
  t.g.add_triple(t.a, t.r, t.c);
  return t;
}

Config dim2() {
  Config cfg;
  cfg.embed_dim = 2;
  return cfg;
}

ParameterStore identity_store(const Tiny& t) {
  ParameterStore s;
  Tensor base({3, 2});
  base.at(t.a.index(), 0) = 1.0;
  base.at(t.b.index(), 1) = 1.0;
  base.at(t.c.index(), 0) = 1.0;
  base.at(t.c.index(), 1) = 1.0;
  s.add(graph_base_name(), base);
  s.add(graph_self_name(0), Tensor::identity(2));
  s.add(graph_relation_name(0, t.r), Tensor::identity(2));
  return s;
}

}  // namespace

TEST_SUITE("graph_encoder") {
  TEST_CASE("hand evaluation of one layer") {
    const Tiny t = tiny(false);
    const Tensor E = encode_entities(t.g, identity_store(t), dim2());
    // e_A = sigmoid(e_B + e_C + e_A) = sigmoid(2, 2).
    const double want = 1.0 / (1.0 + std::exp(-2.0));
    CHECK(std::abs(E.at(t.a.index(), 0) - want) < 1e-12);
    CHECK(std::abs(E.at(t.a.index(), 1) - want) < 1e-12);
    CHECK(std::abs(want - 0.880797) < 1e-6);
  }

  TEST_CASE("isolated node with zero input gives one half") {
    KnowledgeGraph g;
    g.add_relation("Genre");
    const EntityId v = g.add_entity("V", EntityKind::item);
    ParameterStore s;
    s.add(graph_base_name(), Tensor({1, 2}));
    s.add(graph_self_name(0), Tensor::identity(2));
    s.add(graph_relation_name(0, RelationId{0}), Tensor::identity(2));
    const Tensor E = encode_entities(g, s, dim2());
    CHECK(E.at(v.index(), 0) == 0.5);
    CHECK(E.at(v.index(), 1) == 0.5);
  }

  TEST_CASE("zero weights give one half everywhere") {
    const auto g = expand_graph(toy_graph());
    Config cfg = dim2();
    cfg.rgcn_layers = 2;
    Rng rng(1);
    ParameterStore s;
    init_graph_encoder(s, g, cfg, rng);
    for (auto& [name, p] : s) {
      if (name != graph_base_name()) p.value.fill(0.0);
    }
    const Tensor E = encode_entities(g, s, cfg);
    for (double v : E.values()) CHECK(v == 0.5);
  }

  TEST_CASE("degree normalization averages neighbors") {
    const Tiny t = tiny(false);
    Config cfg = dim2();
    cfg.norm_mode = NormMode::degree;
    const Tensor E = encode_entities(t.g, identity_store(t), cfg);
    // (e_B + e_C) / 2 + e_A = (1.5, 1).
    CHECK(std::abs(E.at(t.a.index(), 0) - 1.0 / (1.0 + std::exp(-1.5))) < 1e-12);
    CHECK(std::abs(E.at(t.a.index(), 1) - 1.0 / (1.0 + std::exp(-1.0))) < 1e-12);
  }

  TEST_CASE("neighbor order does not matter") {
    const Tiny t1 = tiny(false), t2 = tiny(true);
    const Tensor E1 = encode_entities(t1.g, identity_store(t1), dim2());
    const Tensor E2 = encode_entities(t2.g, identity_store(t2), dim2());
    for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(E1.at(t1.a.index(), j) - E2.at(t2.a.index(), j)) < 1e-12);
  }

  TEST_CASE("single-entity encoding equals the table row") {
    const auto g = expand_graph(toy_graph());
    for (std::size_t layers : {1, 2}) {
      Config cfg;
      cfg.embed_dim = 6;
      cfg.rgcn_layers = layers;
      Rng rng(layers);
      ParameterStore s;
      init_graph_encoder(s, g, cfg, rng);
      const Tensor E = encode_entities(g, s, cfg);
      for (std::size_t v = 0; v < g.entity_count(); ++v) {
        const Tensor row = encode_entity(g, s, cfg, EntityId{static_cast<std::uint32_t>(v)});
        for (std::size_t j = 0; j < cfg.embed_dim; ++j) CHECK(row[j] == E.at(v, j));
      }
    }
  }

  TEST_CASE("tape encoding equals value encoding and tracks parameter changes") {
    const auto g = expand_graph(toy_graph());
    Config cfg;
    cfg.embed_dim = 3;
    Rng rng(9);
    ParameterStore s;
    init_graph_encoder(s, g, cfg, rng);
    {
      ad::Tape tape;
      CHECK(encode_entities(tape, g, s, cfg).value() == encode_entities(g, s, cfg));
    }
    const Tensor before = encode_entities(g, s, cfg);
    s.at(graph_self_name(0)).value[0] += 0.5;
    CHECK_FALSE(encode_entities(g, s, cfg) == before);
  }

  TEST_CASE("missing relation weights are a configuration error") {
    const Tiny t = tiny(false);
    ParameterStore s;
    s.add(graph_base_name(), Tensor({3, 2}));
    s.add(graph_self_name(0), Tensor::identity(2));
    CHECK_THROWS_AS(encode_entities(t.g, s, dim2()), ConfigError);
  }
}
