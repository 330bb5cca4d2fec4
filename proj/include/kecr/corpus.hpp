// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kecr/ids.hpp"

namespace kecr {

class KnowledgeGraph;
class Lexicon;

enum class Speaker : std::uint8_t { seeker = 0, wizard = 1 };

/// Fixed order; also the argmax tie-break order.
enum class Action : std::uint8_t { query = 0, recommend = 1, chat = 2 };
inline constexpr std::size_t kActionCount = 3;

std::string_view to_string(Speaker s);
std::string_view to_string(Action a);
std::optional<Speaker> parse_speaker(std::string_view text);
std::optional<Action> parse_action(std::string_view text);

struct Turn {
  Speaker speaker = Speaker::seeker;
  std::string text;
  std::vector<EntityId> entities;
  std::optional<Action> action;
};

struct ConversationRecord {
  std::string id;
  std::vector<Turn> turns;
};

struct CorpusDiagnostics {
  std::size_t conversations = 0;
  std::size_t unresolved_mentions = 0;
  std::size_t merged_turns = 0;
  std::size_t prepended_seeker_turns = 0;
};

/// One conversation per JSON line. Turns without an "entities" array are
/// linked from their text when a lexicon is given. Consecutive turns from the
/// same speaker are merged, and a conversation opened by the wizard gets an
/// empty seeker turn in front, so speakers alternate starting with the seeker.
std::vector<ConversationRecord> load_corpus(const std::filesystem::path& path, const KnowledgeGraph& g,
                                            const Lexicon* lexicon = nullptr,
                                            CorpusDiagnostics* diagnostics = nullptr);

void save_corpus(const std::vector<ConversationRecord>& corpus, const KnowledgeGraph& g,
                 const std::filesystem::path& path);

/// Applies the alternation repair described above; returns the number of
/// merges performed.
std::size_t repair_turns(ConversationRecord& rec, bool* prepended = nullptr);

/// Fills missing wizard labels: recommend if an item is mentioned, query if
/// an attribute or category is mentioned or the text ends with '?', chat
/// otherwise. Explicit labels are kept.
ConversationRecord derive_action_labels(ConversationRecord rec, const KnowledgeGraph& g);

/// A seeker utterance with the system utterance that preceded it. `target`
/// is the label of the wizard reply that follows, when there is one.
struct Round {
  std::size_t index = 0;
  std::string system_text;
  std::string user_text;
  /// Mentions of the preceding wizard turn, then of the seeker turn.
  std::vector<EntityId> entities;
  std::optional<Action> target;
  std::optional<std::size_t> reply_turn;
};

std::vector<Round> segment_rounds(const ConversationRecord& rec);

struct ReasoningLabel {
  std::size_t round = 0;
  std::size_t turn = 0;
  Action action = Action::recommend;
  EntityId start;
  EntityId first_target;
  std::optional<EntityId> second_target;
};

/// Path supervision for labeled query/recommend wizard turns. The start is
/// an earlier mention (most recent first, category entities when nothing was
/// mentioned yet). The search prefers a direct neighbor of the kind the
/// action asks for, then a two-hop route through a bridging entity, then any
/// direct neighbor. Turns with no path are skipped.
std::vector<ReasoningLabel> derive_reasoning_labels(const ConversationRecord& rec, const KnowledgeGraph& g);

}  // namespace kecr
