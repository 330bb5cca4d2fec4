// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kecr/ids.hpp"

namespace kecr {

class KnowledgeGraph;

/// Lowercases ASCII letters and turns ASCII punctuation into spaces. Bytes
/// outside ASCII are kept so UTF-8 names survive.
std::string normalize_text(std::string_view text);

/// Whitespace split of normalize_text(text).
std::vector<std::string> tokenize(std::string_view text);

/// Alias table for exact mention matching over normalized tokens.
class Lexicon {
 public:
  Lexicon() = default;
  /// Canonical names and all aliases of every entity in `g`. An alias shared
  /// by several entities resolves to the lowest id.
  explicit Lexicon(const KnowledgeGraph& g);

  void add(std::string_view alias, EntityId id);

  /// Longest match first, scanning left to right; matches never overlap and
  /// are returned in textual order, repeats included.
  std::vector<EntityId> link(std::string_view text) const;

  std::size_t size() const noexcept { return table_.size(); }

 private:
  std::unordered_map<std::string, EntityId> table_;
  std::size_t max_tokens_ = 0;
};

}  // namespace kecr
