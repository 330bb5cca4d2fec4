// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kecr/corpus.hpp"
#include "kecr/kg.hpp"

namespace kecr {

/// Generated graph and dialogues. `base` holds forward triples only, as a
/// triple file would; `graph` is its expansion.
struct SyntheticData {
  KnowledgeGraph base;
  KnowledgeGraph graph;
  std::vector<ConversationRecord> corpus;
};

/// Five-entity movie graph: Annabelle and Dead Silence (horror films, both
/// linked to James Wan), Dead Silence released in 2007.
KnowledgeGraph toy_graph();

/// Toy graph plus templated dialogues in which a request for horror films
/// like Annabelle is answered with Dead Silence, explained by James Wan.
/// About half the dialogues open with a greeting answered by a query.
SyntheticData toy_scenario(std::size_t dialogues = 50, std::uint64_t seed = 42);

/// `entities` entities (items and genre values). Each entity has its own
/// cue words; a seeker turn that mentions an entity contains its cues.
SyntheticData planted_mi_corpus(std::size_t conversations = 200, std::size_t entities = 50,
                                std::uint64_t seed = 42);

/// The wizard action after each seeker turn is fixed by a cue word in that
/// turn: "whichever" asks for a query, "suggest" for a recommendation,
/// "thanks" for chat. All other words are filler.
SyntheticData planted_policy_corpus(std::size_t conversations = 300, std::uint64_t seed = 42);

/// 10 genres, 25 directors, 15 actors and 250 items, one per (genre,
/// director) pair. The seeker names a genre and a director; the gold reply
/// recommends the unique item with both, explained by its actor.
SyntheticData planted_reasoner_corpus(std::size_t conversations = 600, std::uint64_t seed = 42);

/// Random forward triples over `entities` entities, with duplicates and
/// self loops mixed in at the given count each.
struct RandomTriples {
  std::vector<std::string> lines;
  std::size_t duplicates = 0;
  std::size_t self_loops = 0;
};
RandomTriples random_triples(std::size_t count, std::size_t entities, std::uint64_t seed,
                             std::size_t duplicates = 0, std::size_t self_loops = 0);

/// Writes triples.tsv, aliases.jsonl and dialogues.jsonl into `dir`.
void write_dataset(const SyntheticData& data, const std::filesystem::path& dir);

}  // namespace kecr
