// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kecr/corpus.hpp"
#include "kecr/ids.hpp"

namespace kecr {

class KnowledgeGraph;

inline constexpr std::string_view kSlotStep1 = "{STEP1}";
inline constexpr std::string_view kSlotStep2 = "{STEP2}";
inline constexpr std::string_view kSlotRel = "{REL}";

/// Surface templates per action, indexed by Action.
struct TemplateSet {
  std::array<std::vector<std::string>, kActionCount> by_action;

  const std::vector<std::string>& of(Action a) const { return by_action[static_cast<std::size_t>(a)]; }
};

TemplateSet default_templates();
/// {"recommend": [...], "query": [...], "chat": [...]}; each action needs at
/// least one template.
TemplateSet load_templates(const std::filesystem::path& path);
TemplateSet parse_templates(const std::string& json_text);

/// Phrase for a relation name, e.g. "Director" -> "directed by".
std::string relation_phrase(std::string_view relation);

/// Fills a template for the action. Only templates whose slots are all
/// available qualify; among those, the ones using the most available slots
/// are kept and `seed` picks one by index. Step entities render with
/// display_name. Throws RealizationError when no template qualifies.
std::string realize(const TemplateSet& ts, const KnowledgeGraph& g, Action action, std::optional<EntityId> step1,
                    std::optional<EntityId> step2, std::optional<RelationId> rel, std::uint64_t seed);

/// Client for an external text generator. Request body:
/// {"action", "entities": [names], "context": last user utterance};
/// response {"text"}.
class GeneratorAdapter {
 public:
  GeneratorAdapter() = default;
  /// `endpoint` like "http://127.0.0.1:8090/generate". Empty disables.
  explicit GeneratorAdapter(const std::string& endpoint, int timeout_ms = 2000);

  bool enabled() const noexcept { return enabled_; }
  std::uint64_t errors() const noexcept { return errors_.load(); }

  /// Generated text, or `fallback` when disabled or on any failure.
  std::string generate(Action action, const std::vector<std::string>& entities, const std::string& context,
                       const std::string& fallback) const;

 private:
  bool enabled_ = false;
  std::string base_;
  std::string path_;
  int timeout_ms_ = 2000;
  mutable std::atomic<std::uint64_t> errors_{0};
};

}  // namespace kecr
