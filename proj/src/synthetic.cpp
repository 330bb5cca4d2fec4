// SPDX-License-Identifier: Apache-2.0
#include "kecr/synthetic.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <set>
#include <tuple>

#include "json.hpp"

#include "kecr/errors.hpp"
#include "kecr/rng.hpp"
#include "kecr/text.hpp"

namespace kecr {

namespace {

class Builder {
 public:
  Builder() {
    for (auto name : kRetainedRelations) g_.add_relation(std::string(name));
  }

  EntityId entity(const std::string& name, EntityKind kind, std::vector<std::string> aliases = {}) {
    const EntityId id = g_.add_entity(name, kind);
    if (!aliases.empty()) g_.set_aliases(id, std::move(aliases));
    return id;
  }

  void link(EntityId head, std::string_view relation, EntityId tail) {
    g_.add_triple(head, *g_.find_relation(relation), tail);
  }

  KnowledgeGraph& graph() { return g_; }

 private:
  KnowledgeGraph g_;
};

SyntheticData finish(KnowledgeGraph base) {
  SyntheticData data;
  data.graph = expand_graph(base);
  data.base = std::move(base);
  return data;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& options) {
  return options[rng.index(options.size())];
}

Turn seeker(const Lexicon& lex, std::string text) {
  Turn t{Speaker::seeker, std::move(text), {}, std::nullopt};
  t.entities = lex.link(t.text);
  return t;
}

Turn wizard(const Lexicon& lex, std::string text, Action action) {
  Turn t{Speaker::wizard, std::move(text), {}, action};
  t.entities = lex.link(t.text);
  return t;
}

std::string numbered(const char* prefix, std::size_t i, int width) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s %0*zu", prefix, width, i);
  return buf;
}

std::string conversation_id(const char* prefix, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s-%04zu", prefix, i);
  return buf;
}

const std::vector<std::string> kFiller = {
    "i", "really", "just", "want", "something", "to", "watch", "tonight", "maybe", "with", "my",
    "friends", "it", "has", "been", "a", "long", "week", "and", "so", "we", "are", "home", "now",
    "honestly", "lately", "pretty", "much", "anything", "works", "for", "me", "too", "ok"};

std::string filler(Rng& rng, std::size_t lo, std::size_t hi) {
  const std::size_t n = lo + rng.index(hi - lo + 1);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!out.empty()) out += ' ';
    out += pick(rng, kFiller);
  }
  return out;
}

}  // namespace

KnowledgeGraph toy_graph() {
  Builder b;
  const EntityId annabelle = b.entity("Annabelle", EntityKind::item);
  const EntityId horror = b.entity("Horror Film", EntityKind::attribute, {"horror", "scary", "horror movies"});
  const EntityId dead_silence = b.entity("Dead Silence", EntityKind::item);
  const EntityId wan = b.entity("James Wan", EntityKind::attribute, {"wan"});
  const EntityId y2007 = b.entity("2007", EntityKind::attribute);
  b.link(annabelle, "Genre", horror);
  b.link(annabelle, "Director", wan);
  b.link(dead_silence, "Genre", horror);
  b.link(dead_silence, "Director", wan);
  b.link(dead_silence, "Time", y2007);
  return b.graph();
}

SyntheticData toy_scenario(std::size_t dialogues, std::uint64_t seed) {
  SyntheticData data = finish(toy_graph());
  const Lexicon lex(data.graph);
  Rng rng(mix_seed(seed, 0x746f79ULL));

  const std::vector<std::string> greetings = {
      "Hi, I am looking for a movie recommendation.", "Hello! Can you recommend a movie?",
      "Hey, I need something to watch tonight.", "Hi there, any movie ideas for me?"};
  const std::vector<std::string> queries = {"What kind of movies do you like?",
                                            "What are you in the mood for?",
                                            "Sure! What sort of films do you enjoy?"};
  const std::vector<std::string> requests = {
      "I love horror movies similar to Annabelle.",
      "I love horror movies similar to Annabelle. I never knew a doll could be so scary.",
      "Can you suggest a horror film like Annabelle?",
      "Something scary like Annabelle would be great.",
      "I want a horror movie, I really enjoyed Annabelle."};
  const std::vector<std::string> recommendations = {
      "Dead Silence might be suitable for you! It is a horror film and a look into the early works of James Wan.",
      "You could try Dead Silence. It is a horror film directed by James Wan.",
      "How about Dead Silence? James Wan directed it and it is pure horror."};
  const std::vector<std::string> thanks = {"Thanks, I will check it out!", "Great, thank you!",
                                           "Sounds good, thanks."};
  const std::vector<std::string> farewells = {"You're welcome, enjoy the movie!",
                                              "Glad I could help. Have a nice day!"};

  for (std::size_t i = 0; i < dialogues; ++i) {
    ConversationRecord rec;
    rec.id = conversation_id("toy", i);
    if (i % 2 == 0) {
      rec.turns.push_back(seeker(lex, pick(rng, greetings)));
      rec.turns.push_back(wizard(lex, pick(rng, queries), Action::query));
    }
    rec.turns.push_back(seeker(lex, pick(rng, requests)));
    rec.turns.push_back(wizard(lex, pick(rng, recommendations), Action::recommend));
    rec.turns.push_back(seeker(lex, pick(rng, thanks)));
    rec.turns.push_back(wizard(lex, pick(rng, farewells), Action::chat));
    data.corpus.push_back(std::move(rec));
  }
  return data;
}

SyntheticData planted_mi_corpus(std::size_t conversations, std::size_t entities, std::uint64_t seed) {
  if (entities < 2) throw ConfigError("planted MI corpus needs at least 2 entities");
  Builder b;
  const std::size_t genres = std::max<std::size_t>(1, entities / 5);
  std::vector<EntityId> ids;
  for (std::size_t i = 0; i < genres; ++i) ids.push_back(b.entity(numbered("Genre", i, 2), EntityKind::attribute));
  for (std::size_t i = genres; i < entities; ++i) {
    const EntityId item = b.entity(numbered("Item", i, 2), EntityKind::item);
    b.link(item, "Genre", ids[i % genres]);
    ids.push_back(item);
  }
  SyntheticData data = finish(b.graph());
  Rng rng(mix_seed(seed, 0x6d6963ULL));

  // Two cue words per entity, drawn from a syllable alphabet.
  const std::vector<std::string> syllables = {"ka", "lo", "mi", "ne", "ru", "sa", "ti", "vo", "ze", "qu"};
  std::vector<std::string> cues;
  for (std::size_t e = 0; e < entities; ++e) {
    std::string a = "c" + syllables[e % 10] + syllables[(e / 10) % 10] + "x";
    std::string z = "d" + syllables[(e * 7 + 3) % 10] + syllables[(e / 10 + 4) % 10] + "y";
    cues.push_back(a + " " + z);
  }
  const std::vector<std::string> openers = {"i like", "what about", "also", "and"};
  const std::vector<std::string> replies = {"Tell me more.", "Okay, noted.", "Interesting, go on.",
                                            "I see."};
  for (std::size_t c = 0; c < conversations; ++c) {
    ConversationRecord rec;
    rec.id = conversation_id("mi", c);
    const std::size_t rounds = 2 + rng.index(2);
    for (std::size_t r = 0; r < rounds; ++r) {
      const std::size_t e = rng.index(entities);
      Turn s{Speaker::seeker, pick(rng, openers) + " " + cues[e], {ids[e]}, std::nullopt};
      rec.turns.push_back(std::move(s));
      rec.turns.push_back(Turn{Speaker::wizard, pick(rng, replies), {}, Action::chat});
    }
    data.corpus.push_back(std::move(rec));
  }
  return data;
}

SyntheticData planted_policy_corpus(std::size_t conversations, std::uint64_t seed) {
  Builder b;
  std::vector<EntityId> genres;
  for (std::size_t i = 0; i < 5; ++i) genres.push_back(b.entity(numbered("Genre", i, 2), EntityKind::attribute));
  for (std::size_t i = 0; i < 20; ++i) {
    b.link(b.entity(numbered("Item", i, 2), EntityKind::item), "Genre", genres[i % genres.size()]);
  }
  SyntheticData data = finish(b.graph());
  Rng rng(mix_seed(seed, 0x706f6cULL));

  const std::array<std::string, kActionCount> cue = {"whichever", "suggest", "thanks"};
  const std::array<std::vector<std::string>, kActionCount> replies = {
      std::vector<std::string>{"Which one do you prefer?", "What do you like most?"},
      std::vector<std::string>{"Here is one you could try.", "This one might be nice."},
      std::vector<std::string>{"You are welcome.", "Have a good evening."}};
  for (std::size_t c = 0; c < conversations; ++c) {
    ConversationRecord rec;
    rec.id = conversation_id("policy", c);
    const std::size_t rounds = 1 + rng.index(3);
    for (std::size_t r = 0; r < rounds; ++r) {
      const auto action = static_cast<Action>(rng.index(kActionCount));
      const std::string text = filler(rng, 1, 3) + " " + cue[static_cast<std::size_t>(action)] + " " + filler(rng, 1, 3);
      rec.turns.push_back(Turn{Speaker::seeker, text, {}, std::nullopt});
      rec.turns.push_back(Turn{Speaker::wizard, pick(rng, replies[static_cast<std::size_t>(action)]), {}, action});
    }
    data.corpus.push_back(std::move(rec));
  }
  return data;
}

SyntheticData planted_reasoner_corpus(std::size_t conversations, std::uint64_t seed) {
  const std::vector<std::string> genre_names = {"Noir", "Western", "Musical", "Thriller", "Comedy",
                                                "Drama", "Fantasy", "Mystery", "Romance", "Animation"};
  constexpr std::size_t kDirectors = 25;
  constexpr std::size_t kActors = 15;
  Builder b;
  Rng rng(mix_seed(seed, 0x726561ULL));
  std::vector<EntityId> genres, directors, actors;
  for (const auto& name : genre_names) genres.push_back(b.entity(name, EntityKind::attribute));
  for (std::size_t i = 0; i < kDirectors; ++i) directors.push_back(b.entity(numbered("Director", i, 2), EntityKind::attribute));
  for (std::size_t i = 0; i < kActors; ++i) actors.push_back(b.entity(numbered("Actor", i, 2), EntityKind::attribute));
  struct Item {
    EntityId id, genre, director, actor;
  };
  std::vector<Item> items;
  for (std::size_t gi = 0; gi < genres.size(); ++gi) {
    for (std::size_t di = 0; di < kDirectors; ++di) {
      const EntityId id = b.entity(numbered("Title", items.size(), 3), EntityKind::item);
      const EntityId actor = actors[rng.index(kActors)];
      b.link(id, "Genre", genres[gi]);
      b.link(id, "Director", directors[di]);
      b.link(id, "Actor", actor);
      items.push_back(Item{id, genres[gi], directors[di], actor});
    }
  }
  SyntheticData data = finish(b.graph());
  const Lexicon lex(data.graph);
  const KnowledgeGraph& g = data.graph;

  const std::vector<std::string> genre_first = {"I am looking for a {G} film by {D}.",
                                                "Any {G} picks directed by {D}?",
                                                "I enjoy {G}, especially the work of {D}."};
  const std::vector<std::string> director_first = {"Anything from {D}? I am in the mood for {G}.",
                                                   "I like {D} and want some {G} tonight.",
                                                   "Do you know films by {D} that are {G}?"};
  const std::vector<std::string> replies = {"You could try {I}. It is starring {A}.",
                                            "{I} might be suitable for you! It stars {A}."};
  auto fill = [](std::string t, std::string_view slot, const std::string& v) {
    for (auto pos = t.find(slot); pos != std::string::npos; pos = t.find(slot)) t.replace(pos, slot.size(), v);
    return t;
  };
  for (std::size_t c = 0; c < conversations; ++c) {
    const Item& it = items[rng.index(items.size())];
    const auto& templates = rng.index(2) == 0 ? genre_first : director_first;
    std::string request = fill(fill(pick(rng, templates), "{G}", g.name(it.genre)), "{D}", g.name(it.director));
    std::string reply = fill(fill(pick(rng, replies), "{I}", g.name(it.id)), "{A}", g.name(it.actor));
    ConversationRecord rec;
    rec.id = conversation_id("reason", c);
    rec.turns.push_back(seeker(lex, request));
    rec.turns.push_back(wizard(lex, reply, Action::recommend));
    rec.turns.push_back(seeker(lex, "Thanks, that sounds great."));
    rec.turns.push_back(wizard(lex, "Enjoy the movie!", Action::chat));
    data.corpus.push_back(std::move(rec));
  }
  return data;
}

RandomTriples random_triples(std::size_t count, std::size_t entities, std::uint64_t seed, std::size_t duplicates,
                             std::size_t self_loops) {
  if (entities < 2) throw ConfigError("random_triples needs at least 2 entities");
  Rng rng(seed);
  RandomTriples out;
  auto name = [](std::size_t i) { return numbered("Node", i, 4); };
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> seen;
  while (out.lines.size() < count) {
    const std::size_t h = rng.index(entities);
    const std::size_t t = rng.index(entities);
    const std::size_t r = rng.index(kRetainedRelations.size());
    if (h == t || !seen.emplace(h, r, t).second) continue;
    out.lines.push_back(name(h) + "\t" + std::string(kRetainedRelations[r]) + "\t" + name(t));
  }
  for (std::size_t i = 0; i < duplicates; ++i) out.lines.push_back(out.lines[rng.index(count)]);
  for (std::size_t i = 0; i < self_loops; ++i) {
    const std::size_t v = rng.index(entities);
    out.lines.push_back(name(v) + "\t" + std::string(kRetainedRelations[rng.index(5)]) + "\t" + name(v));
  }
  out.duplicates = duplicates;
  out.self_loops = self_loops;
  rng.shuffle(out.lines);
  return out;
}

void write_dataset(const SyntheticData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const KnowledgeGraph& g = data.base;
  {
    std::ofstream out(dir / "triples.tsv");
    if (!out) throw NotFoundError("cannot write " + (dir / "triples.tsv").string());
    for (const auto& t : g.triples()) {
      out << g.name(t.head) << '\t' << g.relation(t.relation).name << '\t' << g.name(t.tail) << '\n';
    }
  }
  {
    std::ofstream out(dir / "aliases.jsonl");
    if (!out) throw NotFoundError("cannot write " + (dir / "aliases.jsonl").string());
    for (const auto& e : g.entities()) {
      nlohmann::ordered_json j;
      j["entity"] = e.name;
      j["kind"] = std::string(to_string(e.kind));
      j["aliases"] = e.aliases;
      out << j.dump() << '\n';
    }
  }
  save_corpus(data.corpus, data.graph, dir / "dialogues.jsonl");
}

}  // namespace kecr
