// SPDX-License-Identifier: Apache-2.0
#include "kecr/realizer.hpp"

#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "httplib.h"
#include "json.hpp"

#include "kecr/errors.hpp"
#include "kecr/kg.hpp"

namespace kecr {

TemplateSet default_templates() {
  TemplateSet ts;
  ts.by_action[static_cast<std::size_t>(Action::recommend)] = {
      "{STEP1} might be suitable for you! It is {REL} {STEP2}.",
      "You could try {STEP1}. It is {REL} {STEP2}.",
      "How about {STEP1}? It is {REL} {STEP2}, so you may enjoy it.",
      "{STEP1} might be suitable for you!",
      "I think you would like {STEP1}.",
      "Have you seen {STEP1}? I think it fits what you are looking for.",
  };
  ts.by_action[static_cast<std::size_t>(Action::query)] = {
      "What kind of {STEP1} do you like?",
      "Which {STEP1} do you usually enjoy?",
      "Is there a particular {STEP1} you are in the mood for?",
      "What are you in the mood for?",
  };
  ts.by_action[static_cast<std::size_t>(Action::chat)] = {
      "You're welcome, enjoy the movie!",
      "Glad I could help. Have a nice day!",
      "Sounds good. Let me know if you want more suggestions.",
  };
  return ts;
}

TemplateSet parse_templates(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("templates: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("templates: expected an object keyed by action");
  TemplateSet ts;
  for (const auto& [key, value] : j.items()) {
    auto action = parse_action(key);
    if (!action) throw ParseError("templates: unknown action '" + key + "'");
    if (!value.is_array()) throw ParseError("templates: '" + key + "' must be an array of strings");
    for (const auto& t : value) {
      if (!t.is_string()) throw ParseError("templates: '" + key + "' must be an array of strings");
      ts.by_action[static_cast<std::size_t>(*action)].push_back(t.get<std::string>());
    }
  }
  for (std::size_t a = 0; a < kActionCount; ++a) {
    if (ts.by_action[a].empty()) {
      throw ParseError("templates: no template for action '" + std::string(to_string(static_cast<Action>(a))) + "'");
    }
  }
  return ts;
}

TemplateSet load_templates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open templates " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_templates(buf.str());
}

std::string relation_phrase(std::string_view relation) {
  if (relation == "Director") return "directed by";
  if (relation == "Actor") return "starring";
  if (relation == "Time") return "released in";
  if (relation == "Genre") return "in the genre";
  if (relation == "Subject") return "about";
  return "related to";
}

namespace {

bool uses(const std::string& t, std::string_view slot) { return t.find(slot) != std::string::npos; }

void replace_all(std::string& text, std::string_view slot, const std::string& value) {
  for (auto pos = text.find(slot); pos != std::string::npos; pos = text.find(slot, pos + value.size())) {
    text.replace(pos, slot.size(), value);
  }
}

}  // namespace

std::string realize(const TemplateSet& ts, const KnowledgeGraph& g, Action action, std::optional<EntityId> step1,
                    std::optional<EntityId> step2, std::optional<RelationId> rel, std::uint64_t seed) {
  const std::array<std::pair<std::string_view, bool>, 3> slots{
      {{kSlotStep1, step1.has_value()}, {kSlotStep2, step2.has_value()}, {kSlotRel, rel.has_value()}}};
  std::vector<const std::string*> best;
  int best_used = -1;
  for (const auto& t : ts.of(action)) {
    int used = 0;
    bool ok = true;
    for (const auto& [slot, available] : slots) {
      if (!uses(t, slot)) continue;
      if (!available) ok = false;
      ++used;
    }
    if (!ok) continue;
    if (used > best_used) {
      best.clear();
      best_used = used;
    }
    if (used == best_used) best.push_back(&t);
  }
  if (best.empty()) {
    throw RealizationError("no '" + std::string(to_string(action)) + "' template fits the available slots");
  }
  std::string text = *best[seed % best.size()];
  if (step1) replace_all(text, kSlotStep1, display_name(g, *step1));
  if (step2) replace_all(text, kSlotStep2, display_name(g, *step2));
  if (rel) replace_all(text, kSlotRel, relation_phrase(g.relation(*rel).name));
  return text;
}

GeneratorAdapter::GeneratorAdapter(const std::string& endpoint, int timeout_ms) : timeout_ms_(timeout_ms) {
  if (endpoint.empty()) return;
  const auto scheme = endpoint.find("://");
  const auto path_pos = endpoint.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  base_ = endpoint.substr(0, path_pos);
  path_ = path_pos == std::string::npos ? "/" : endpoint.substr(path_pos);
  enabled_ = true;
}

std::string GeneratorAdapter::generate(Action action, const std::vector<std::string>& entities,
                                       const std::string& context, const std::string& fallback) const {
  if (!enabled_) return fallback;
  try {
    httplib::Client client(base_);
    client.set_connection_timeout(0, timeout_ms_ * 1000);
    client.set_read_timeout(0, timeout_ms_ * 1000);
    client.set_write_timeout(0, timeout_ms_ * 1000);
    nlohmann::json body{{"action", to_string(action)}, {"entities", entities}, {"context", context}};
    auto res = client.Post(path_, body.dump(), "application/json");
    if (!res || res->status != 200) {
      ++errors_;
      spdlog::warn("generator request failed ({}), using template text",
                   res ? std::to_string(res->status) : httplib::to_string(res.error()));
      return fallback;
    }
    auto reply = nlohmann::json::parse(res->body);
    if (!reply.is_object() || !reply.contains("text") || !reply["text"].is_string()) {
      ++errors_;
      spdlog::warn("generator reply has no \"text\" field, using template text");
      return fallback;
    }
    return reply["text"].get<std::string>();
  } catch (const std::exception& e) {
    ++errors_;
    spdlog::warn("generator error: {}", e.what());
    return fallback;
  }
}

}  // namespace kecr
