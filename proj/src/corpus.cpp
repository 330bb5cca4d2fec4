// SPDX-License-Identifier: Apache-2.0
#include "kecr/corpus.hpp"

#include <algorithm>
#include <fstream>

#include <spdlog/spdlog.h>

#include "json.hpp"

#include "kecr/errors.hpp"
#include "kecr/kg.hpp"
#include "kecr/text.hpp"

namespace kecr {

std::string_view to_string(Speaker s) { return s == Speaker::seeker ? "seeker" : "wizard"; }

std::string_view to_string(Action a) {
  switch (a) {
    case Action::query:
      return "query";
    case Action::recommend:
      return "recommend";
    case Action::chat:
      return "chat";
  }
  return "chat";
}

std::optional<Speaker> parse_speaker(std::string_view text) {
  if (text == "seeker" || text == "user") return Speaker::seeker;
  if (text == "wizard" || text == "system") return Speaker::wizard;
  return std::nullopt;
}

std::optional<Action> parse_action(std::string_view text) {
  if (text == "query") return Action::query;
  if (text == "recommend") return Action::recommend;
  if (text == "chat") return Action::chat;
  return std::nullopt;
}

std::size_t repair_turns(ConversationRecord& rec, bool* prepended) {
  std::size_t merges = 0;
  std::vector<Turn> out;
  for (auto& turn : rec.turns) {
    if (!out.empty() && out.back().speaker == turn.speaker) {
      Turn& prev = out.back();
      if (!turn.text.empty()) prev.text += prev.text.empty() ? turn.text : " " + turn.text;
      prev.entities.insert(prev.entities.end(), turn.entities.begin(), turn.entities.end());
      if (turn.action) prev.action = turn.action;
      ++merges;
    } else {
      out.push_back(std::move(turn));
    }
  }
  bool added = false;
  if (!out.empty() && out.front().speaker == Speaker::wizard) {
    out.insert(out.begin(), Turn{Speaker::seeker, "", {}, std::nullopt});
    added = true;
  }
  rec.turns = std::move(out);
  if (prepended) *prepended = added;
  return merges;
}

std::vector<ConversationRecord> load_corpus(const std::filesystem::path& path, const KnowledgeGraph& g,
                                            const Lexicon* lexicon, CorpusDiagnostics* diagnostics) {
  CorpusDiagnostics local;
  CorpusDiagnostics& diag = diagnostics ? *diagnostics : local;
  diag = CorpusDiagnostics{};

  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open corpus " + path.string());

  std::vector<ConversationRecord> corpus;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path.string() + ": invalid JSON: " + e.what(), lineno);
    }
    if (!j.is_object() || !j.contains("turns") || !j["turns"].is_array()) {
      throw ParseError(path.string() + ": expected an object with a \"turns\" array", lineno);
    }
    ConversationRecord rec;
    if (j.contains("id")) {
      rec.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
    } else {
      rec.id = std::to_string(corpus.size());
    }
    for (const auto& jt : j["turns"]) {
      if (!jt.is_object()) throw ParseError(path.string() + ": turn must be an object", lineno);
      Turn turn;
      auto speaker = jt.contains("speaker") && jt["speaker"].is_string()
                         ? parse_speaker(jt["speaker"].get<std::string>())
                         : std::nullopt;
      if (!speaker) throw ParseError(path.string() + ": bad or missing \"speaker\"", lineno);
      turn.speaker = *speaker;
      if (jt.contains("text")) {
        if (!jt["text"].is_string()) throw ParseError(path.string() + ": \"text\" must be a string", lineno);
        turn.text = jt["text"].get<std::string>();
      }
      if (jt.contains("action") && !jt["action"].is_null()) {
        auto action = jt["action"].is_string() ? parse_action(jt["action"].get<std::string>()) : std::nullopt;
        if (!action) throw ParseError(path.string() + ": bad \"action\"", lineno);
        turn.action = action;
      }
      if (jt.contains("entities")) {
        if (!jt["entities"].is_array()) throw ParseError(path.string() + ": \"entities\" must be an array", lineno);
        for (const auto& name : jt["entities"]) {
          auto id = name.is_string() ? g.find_entity(name.get<std::string>()) : std::nullopt;
          if (id) {
            turn.entities.push_back(*id);
          } else {
            ++diag.unresolved_mentions;
          }
        }
      } else if (lexicon) {
        turn.entities = lexicon->link(turn.text);
      }
      rec.turns.push_back(std::move(turn));
    }
    if (rec.turns.empty()) throw ParseError(path.string() + ": conversation has no turns", lineno);
    bool prepended = false;
    diag.merged_turns += repair_turns(rec, &prepended);
    if (prepended) ++diag.prepended_seeker_turns;
    corpus.push_back(std::move(rec));
  }
  diag.conversations = corpus.size();
  if (diag.unresolved_mentions > 0) {
    spdlog::warn("{}: {} entity mentions did not resolve and were dropped", path.string(),
                 diag.unresolved_mentions);
  }
  return corpus;
}

void save_corpus(const std::vector<ConversationRecord>& corpus, const KnowledgeGraph& g,
                 const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw NotFoundError("cannot write " + path.string());
  for (const auto& rec : corpus) {
    nlohmann::json j;
    j["id"] = rec.id;
    j["turns"] = nlohmann::json::array();
    for (const auto& t : rec.turns) {
      nlohmann::json jt;
      jt["speaker"] = to_string(t.speaker);
      jt["text"] = t.text;
      jt["entities"] = nlohmann::json::array();
      for (auto e : t.entities) jt["entities"].push_back(g.name(e));
      if (t.action) jt["action"] = to_string(*t.action);
      j["turns"].push_back(std::move(jt));
    }
    out << j.dump() << '\n';
  }
}

ConversationRecord derive_action_labels(ConversationRecord rec, const KnowledgeGraph& g) {
  for (auto& turn : rec.turns) {
    if (turn.speaker != Speaker::wizard || turn.action) continue;
    bool item = false;
    bool attribute = false;
    for (auto e : turn.entities) {
      if (g.kind(e) == EntityKind::item) {
        item = true;
      } else {
        attribute = true;
      }
    }
    const auto last = turn.text.find_last_not_of(" \t\r\n");
    const bool question = last != std::string::npos && turn.text[last] == '?';
    if (item) {
      turn.action = Action::recommend;
    } else if (attribute || question) {
      turn.action = Action::query;
    } else {
      turn.action = Action::chat;
    }
  }
  return rec;
}

std::vector<Round> segment_rounds(const ConversationRecord& rec) {
  std::vector<Round> rounds;
  const Turn* prev_wizard = nullptr;
  for (std::size_t i = 0; i < rec.turns.size(); ++i) {
    const Turn& turn = rec.turns[i];
    if (turn.speaker == Speaker::wizard) {
      prev_wizard = &turn;
      continue;
    }
    Round r;
    r.index = rounds.size();
    r.user_text = turn.text;
    if (prev_wizard) {
      r.system_text = prev_wizard->text;
      r.entities = prev_wizard->entities;
    }
    r.entities.insert(r.entities.end(), turn.entities.begin(), turn.entities.end());
    if (i + 1 < rec.turns.size() && rec.turns[i + 1].speaker == Speaker::wizard) {
      r.reply_turn = i + 1;
      r.target = rec.turns[i + 1].action;
    }
    rounds.push_back(std::move(r));
  }
  return rounds;
}

namespace {

bool preferred_kind(EntityKind kind, Action action) {
  return action == Action::recommend ? kind == EntityKind::item : kind != EntityKind::item;
}

}  // namespace

std::vector<ReasoningLabel> derive_reasoning_labels(const ConversationRecord& rec, const KnowledgeGraph& g) {
  std::vector<ReasoningLabel> labels;
  std::vector<EntityId> history;
  std::size_t round = 0;
  std::size_t seeker_turns = 0;
  for (std::size_t ti = 0; ti < rec.turns.size(); ++ti) {
    const Turn& turn = rec.turns[ti];
    if (turn.speaker == Speaker::seeker) {
      round = seeker_turns++;
    }
    if (turn.speaker == Speaker::wizard && turn.action && *turn.action != Action::chat &&
        !turn.entities.empty() && seeker_turns > 0) {
      const Action action = *turn.action;
      std::vector<EntityId> starts;
      for (auto it = history.rbegin(); it != history.rend(); ++it) {
        if (std::find(starts.begin(), starts.end(), *it) == starts.end()) starts.push_back(*it);
      }
      if (starts.empty()) starts = g.categories();

      std::optional<ReasoningLabel> found;
      auto make = [&](EntityId s, EntityId first, std::optional<EntityId> second) {
        ReasoningLabel l;
        l.round = round;
        l.turn = ti;
        l.action = action;
        l.start = s;
        l.first_target = first;
        l.second_target = second;
        return l;
      };

      // Direct neighbor of the wanted kind.
      for (auto s : starts) {
        for (auto e : turn.entities) {
          if (e != s && preferred_kind(g.kind(e), action) && g.adjacent(s, e)) {
            found = make(s, e, std::nullopt);
            break;
          }
        }
        if (found) break;
      }
      // Two hops: the bridge becomes the first target.
      for (std::size_t si = 0; !found && si < starts.size(); ++si) {
        const EntityId s = starts[si];
        for (auto e : turn.entities) {
          if (e == s || !preferred_kind(g.kind(e), action) || g.adjacent(s, e)) continue;
          std::optional<EntityId> bridge;
          for (auto b : turn.entities) {
            if (b != s && b != e && g.adjacent(s, b) && g.adjacent(b, e)) {
              bridge = b;
              break;
            }
          }
          if (!bridge) {
            for (const auto& n : g.neighbors(s)) {
              if (n.entity != e && g.adjacent(n.entity, e) && (!bridge || n.entity < *bridge)) bridge = n.entity;
            }
          }
          if (bridge) {
            found = make(s, *bridge, e);
            break;
          }
        }
      }
      // Any direct neighbor.
      for (std::size_t si = 0; !found && si < starts.size(); ++si) {
        for (auto e : turn.entities) {
          if (e != starts[si] && g.adjacent(starts[si], e)) {
            found = make(starts[si], e, std::nullopt);
            break;
          }
        }
      }
      if (found) {
        if (!found->second_target) {
          for (auto e : turn.entities) {
            if (e != found->start && e != found->first_target && g.adjacent(found->first_target, e)) {
              found->second_target = e;
              break;
            }
          }
        }
        labels.push_back(*found);
      }
    }
    history.insert(history.end(), turn.entities.begin(), turn.entities.end());
  }
  return labels;
}

}  // namespace kecr
