// SPDX-License-Identifier: Apache-2.0
#include "kecr/text.hpp"

#include <sstream>

#include "kecr/kg.hpp"

namespace kecr {

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c >= 0x80) {
      out.push_back(ch);
    } else if (c >= 'A' && c <= 'Z') {
      out.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      out.push_back(ch);
    } else {
      out.push_back(' ');
    }
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::istringstream in(normalize_text(text));
  for (std::string tok; in >> tok;) tokens.push_back(std::move(tok));
  return tokens;
}

namespace {

std::string join(const std::vector<std::string>& tokens, std::size_t from, std::size_t count) {
  std::string key;
  for (std::size_t i = from; i < from + count; ++i) {
    if (i > from) key.push_back(' ');
    key += tokens[i];
  }
  return key;
}

}  // namespace

Lexicon::Lexicon(const KnowledgeGraph& g) {
  for (std::size_t i = 0; i < g.entity_count(); ++i) {
    const EntityId id{static_cast<std::uint32_t>(i)};
    const Entity& e = g.entity(id);
    add(e.name, id);
    for (const auto& alias : e.aliases) add(alias, id);
  }
}

void Lexicon::add(std::string_view alias, EntityId id) {
  const auto tokens = tokenize(alias);
  if (tokens.empty()) return;
  const std::string key = join(tokens, 0, tokens.size());
  auto [it, inserted] = table_.emplace(key, id);
  if (!inserted && id < it->second) it->second = id;
  max_tokens_ = std::max(max_tokens_, tokens.size());
}

std::vector<EntityId> Lexicon::link(std::string_view text) const {
  std::vector<EntityId> out;
  const auto tokens = tokenize(text);
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t matched = 0;
    for (std::size_t len = std::min(max_tokens_, tokens.size() - i); len > 0; --len) {
      auto it = table_.find(join(tokens, i, len));
      if (it != table_.end()) {
        out.push_back(it->second);
        matched = len;
        break;
      }
    }
    i += matched ? matched : 1;
  }
  return out;
}

}  // namespace kecr
