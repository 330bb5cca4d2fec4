// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kecr/ids.hpp"

namespace kecr {

enum class EntityKind : std::uint8_t { item = 0, attribute = 1, category = 2 };

std::string_view to_string(EntityKind kind);
std::optional<EntityKind> parse_entity_kind(std::string_view text);

struct Entity {
  std::string name;
  EntityKind kind = EntityKind::item;
  std::vector<std::string> aliases;
};

struct Relation {
  std::string name;
  std::optional<RelationId> inverse_of;
};

struct Triple {
  EntityId head;
  RelationId relation;
  EntityId tail;
  auto operator<=>(const Triple&) const = default;
};

struct Neighbor {
  EntityId entity;
  RelationId relation;
  bool operator==(const Neighbor&) const = default;
};

/// Relations kept from the source graph, in relation-id order.
inline constexpr std::array<std::string_view, 5> kRetainedRelations = {"Actor", "Director", "Time",
                                                                      "Genre", "Subject"};
inline constexpr std::string_view kBelongRelation = "Belong";
inline constexpr std::string_view kInverseSuffix = "^-1";
inline constexpr std::string_view kCategorySuffix = "Category";

/// Entity/relation/triple store with a per-entity neighbor index. Immutable
/// once built; concurrent readers need no locking.
class KnowledgeGraph {
 public:
  std::size_t entity_count() const noexcept { return entities_.size(); }
  std::size_t relation_count() const noexcept { return relations_.size(); }
  std::size_t triple_count() const noexcept { return triples_.size(); }

  const Entity& entity(EntityId id) const;
  const Relation& relation(RelationId id) const;
  std::span<const Entity> entities() const noexcept { return entities_; }
  std::span<const Relation> relations() const noexcept { return relations_; }
  /// Ordered by (head, relation, tail), no duplicates.
  const std::set<Triple>& triples() const noexcept { return triples_; }

  std::optional<EntityId> find_entity(std::string_view name) const;
  std::optional<RelationId> find_relation(std::string_view name) const;
  EntityKind kind(EntityId id) const { return entity(id).kind; }
  const std::string& name(EntityId id) const { return entity(id).name; }

  /// All (neighbor, relation) pairs of v, ordered by relation id then entity id.
  /// Throws NotFoundError for an unknown id.
  std::span<const Neighbor> neighbors(EntityId v) const;
  /// Tails of v under one relation, sorted.
  std::vector<EntityId> neighbors(EntityId v, RelationId r) const;
  bool adjacent(EntityId a, EntityId b) const;
  /// First relation r with (a, r, b) present.
  std::optional<RelationId> relation_between(EntityId a, EntityId b) const;

  /// Category entities in id order.
  std::vector<EntityId> categories() const;
  std::vector<EntityId> entities_of_kind(EntityKind kind) const;

  bool expanded() const noexcept { return expanded_; }

  // Construction. Used by the loaders; keeps the index consistent.
  EntityId add_entity(std::string name, EntityKind kind);
  RelationId add_relation(std::string name);
  void set_inverse(RelationId a, RelationId b);
  /// Returns false when the triple was already present.
  bool add_triple(EntityId head, RelationId relation, EntityId tail);
  void set_aliases(EntityId id, std::vector<std::string> aliases);
  void mark_expanded() { expanded_ = true; }

 private:
  std::vector<Entity> entities_;
  std::vector<Relation> relations_;
  std::set<Triple> triples_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::unordered_map<std::string, EntityId> entity_by_name_;
  bool expanded_ = false;
};

struct LoadReport {
  std::size_t lines = 0;
  std::size_t duplicate_triples = 0;
  std::size_t self_loops = 0;
  std::size_t kind_conflicts = 0;
};

/// Reads `head<TAB>relation<TAB>tail` lines plus a JSON-lines alias lexicon.
/// Entity ids follow first appearance in the triple file; entities known only
/// from the lexicon come after, in lexicon order. Forward triples only.
KnowledgeGraph load_triples(const std::filesystem::path& triples_path,
                            const std::filesystem::path& alias_path, LoadReport* report = nullptr);

/// Adds the inverse of every retained relation, one category entity per
/// retained relation, and Belong links from each attribute value to the
/// category of the relation it is a value of (with the inverse link).
KnowledgeGraph expand_graph(const KnowledgeGraph& g);

std::string inverse_name(std::string_view relation);
std::string category_name(std::string_view relation);
/// Display word for an entity: categories render as their relation name in
/// lowercase ("genre"); everything else keeps its canonical name.
std::string display_name(const KnowledgeGraph& g, EntityId id);

void save_graph(const KnowledgeGraph& g, const std::filesystem::path& path);
KnowledgeGraph load_graph(const std::filesystem::path& path);

}  // namespace kecr
