// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "kecr/config.hpp"
#include "kecr/context_encoder.hpp"
#include "kecr/kg.hpp"
#include "kecr/rng.hpp"
#include "kecr/synthetic.hpp"

using namespace kecr;

TEST_SUITE("context") {
  TEST_CASE("empty text is the zero vector") {
    const UtteranceEmbedder emb(8, 101, 3);
    CHECK(emb.embed_utterance("") == Tensor({8}));
    CHECK(emb.embed_utterance(" ,.! ") == Tensor({8}));
  }

  TEST_CASE("one token is its row") {
    const UtteranceEmbedder emb(8, 101, 3);
    CHECK(emb.embed_utterance("Annabelle") == emb.token_embedding("annabelle"));
  }

  TEST_CASE("two tokens average their rows") {
    const UtteranceEmbedder emb(8, 101, 3);
    const Tensor a = emb.token_embedding("a"), b = emb.token_embedding("b");
    const Tensor ab = emb.embed_utterance("a b");
    for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(ab[i] - (a[i] + b[i]) / 2.0) < 1e-12);
  }

  TEST_CASE("rows are fixed functions of seed and bucket") {
    const UtteranceEmbedder a(8, 101, 3), b(8, 101, 3), c(8, 101, 4);
    CHECK(a.row(17) == b.row(17));
    CHECK_FALSE(a.row(17) == c.row(17));
    const Tensor r5 = a.row(5);
    for (double v : r5.values()) CHECK((v >= -1.0 && v <= 1.0));
    CHECK(a.bucket("horror") < 101);
  }

  TEST_CASE("round embedding joins both sides with a separator") {
    const UtteranceEmbedder emb(4, 31, 1);
    const Tensor got = emb.embed_round("what kind", "horror");
    const Tensor want = emb.embed_tokens({"what", "kind", std::string(kSeparatorToken), "horror"});
    CHECK(got == want);
  }

  TEST_CASE("zero GRU halves the context") {
    Config cfg;
    cfg.embed_dim = 3;
    Rng rng(2);
    ParameterStore s;
    init_context_encoder(s, cfg, rng);
    for (auto& [_, p] : s) p.value.fill(0.0);
    DialogueState st = DialogueState::initial(3);
    st.q = Tensor::vector({1.0, -2.0, 4.0});
    const auto next = advance_context(st, gru_weights(s), Tensor::vector({9.0, 9.0, 9.0}));
    CHECK(next.q == Tensor::vector({0.5, -1.0, 2.0}));
    CHECK(next.round == 1);
  }

  TEST_CASE("first step from zero equals one GRU cell") {
    Config cfg;
    cfg.embed_dim = 3;
    Rng rng(5);
    ParameterStore s;
    init_context_encoder(s, cfg, rng);
    const Tensor x = Tensor::vector({0.3, -0.1, 0.7});
    const auto next = advance_context(DialogueState::initial(3), gru_weights(s), x);
    CHECK(next.q == gru_cell(gru_weights(s), Tensor({3}), x));
  }

  TEST_CASE("belief log keeps chronological order and repeats") {
    const auto g = expand_graph(toy_graph());
    const EntityId annabelle = *g.find_entity("Annabelle"), horror = *g.find_entity("Horror Film");
    Tensor E({g.entity_count(), 2});
    for (std::size_t v = 0; v < g.entity_count(); ++v) E.at(v, 0) = static_cast<double>(v);

    DialogueState st = DialogueState::initial(2);
    const auto same = update_belief(st, {}, E);
    CHECK(same.mentioned.empty());
    CHECK(same.mention_groups.empty());

    st = update_belief(st, {annabelle}, E);
    REQUIRE(st.mentioned.size() == 1);
    CHECK(st.belief[0][0] == static_cast<double>(annabelle.index()));
    st = update_belief(st, {horror, annabelle}, E);
    CHECK(st.mentioned == std::vector<EntityId>{annabelle, horror, annabelle});
    CHECK(st.mention_groups.size() == 2);
    CHECK(st.mention_groups.back() == std::vector<EntityId>{horror, annabelle});

    const Tensor D = belief_matrix(st);
    CHECK(D.rows() == 2);
    CHECK(D.cols() == 3);
    CHECK(D.at(0, 1) == static_cast<double>(horror.index()));
  }
}
