// SPDX-License-Identifier: Apache-2.0
#include "kecr/kg.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "kecr/errors.hpp"

namespace kecr {

std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::item:
      return "item";
    case EntityKind::attribute:
      return "attribute";
    case EntityKind::category:
      return "category";
  }
  return "item";
}

std::optional<EntityKind> parse_entity_kind(std::string_view text) {
  if (text == "item") return EntityKind::item;
  if (text == "attribute") return EntityKind::attribute;
  if (text == "category") return EntityKind::category;
  return std::nullopt;
}

const Entity& KnowledgeGraph::entity(EntityId id) const {
  if (id.index() >= entities_.size()) {
    throw NotFoundError("entity id " + std::to_string(id.value) + " out of range");
  }
  return entities_[id.index()];
}

const Relation& KnowledgeGraph::relation(RelationId id) const {
  if (id.index() >= relations_.size()) {
    throw NotFoundError("relation id " + std::to_string(id.value) + " out of range");
  }
  return relations_[id.index()];
}

std::optional<EntityId> KnowledgeGraph::find_entity(std::string_view name) const {
  auto it = entity_by_name_.find(std::string(name));
  if (it == entity_by_name_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> KnowledgeGraph::find_relation(std::string_view name) const {
  for (std::size_t i = 0; i < relations_.size(); ++i) {
    if (relations_[i].name == name) return RelationId{static_cast<std::uint32_t>(i)};
  }
  return std::nullopt;
}

std::span<const Neighbor> KnowledgeGraph::neighbors(EntityId v) const {
  if (v.index() >= adjacency_.size()) {
    throw NotFoundError("entity id " + std::to_string(v.value) + " out of range");
  }
  return adjacency_[v.index()];
}

std::vector<EntityId> KnowledgeGraph::neighbors(EntityId v, RelationId r) const {
  std::vector<EntityId> out;
  for (const auto& n : neighbors(v)) {
    if (n.relation == r) out.push_back(n.entity);
  }
  return out;
}

bool KnowledgeGraph::adjacent(EntityId a, EntityId b) const {
  return relation_between(a, b).has_value();
}

std::optional<RelationId> KnowledgeGraph::relation_between(EntityId a, EntityId b) const {
  for (const auto& n : neighbors(a)) {
    if (n.entity == b) return n.relation;
  }
  return std::nullopt;
}

std::vector<EntityId> KnowledgeGraph::categories() const { return entities_of_kind(EntityKind::category); }

std::vector<EntityId> KnowledgeGraph::entities_of_kind(EntityKind kind) const {
  std::vector<EntityId> out;
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    if (entities_[i].kind == kind) out.push_back(EntityId{static_cast<std::uint32_t>(i)});
  }
  return out;
}

EntityId KnowledgeGraph::add_entity(std::string name, EntityKind kind) {
  if (auto found = find_entity(name)) return *found;
  const EntityId id{static_cast<std::uint32_t>(entities_.size())};
  entity_by_name_.emplace(name, id);
  entities_.push_back(Entity{std::move(name), kind, {}});
  adjacency_.emplace_back();
  return id;
}

RelationId KnowledgeGraph::add_relation(std::string name) {
  if (auto found = find_relation(name)) return *found;
  relations_.push_back(Relation{std::move(name), std::nullopt});
  return RelationId{static_cast<std::uint32_t>(relations_.size() - 1)};
}

void KnowledgeGraph::set_inverse(RelationId a, RelationId b) {
  relation(a);
  relation(b);
  relations_[a.index()].inverse_of = b;
  relations_[b.index()].inverse_of = a;
}

bool KnowledgeGraph::add_triple(EntityId head, RelationId rel, EntityId tail) {
  entity(head);
  entity(tail);
  relation(rel);
  if (!triples_.insert(Triple{head, rel, tail}).second) return false;
  auto& adj = adjacency_[head.index()];
  const Neighbor n{tail, rel};
  auto pos = std::lower_bound(adj.begin(), adj.end(), n, [](const Neighbor& x, const Neighbor& y) {
    return std::pair(x.relation, x.entity) < std::pair(y.relation, y.entity);
  });
  adj.insert(pos, n);
  return true;
}

void KnowledgeGraph::set_aliases(EntityId id, std::vector<std::string> aliases) {
  entity(id);
  entities_[id.index()].aliases = std::move(aliases);
}

std::string inverse_name(std::string_view relation) {
  return std::string(relation) + std::string(kInverseSuffix);
}

std::string category_name(std::string_view relation) {
  return std::string(relation) + std::string(kCategorySuffix);
}

std::string display_name(const KnowledgeGraph& g, EntityId id) {
  const Entity& e = g.entity(id);
  if (e.kind != EntityKind::category) return e.name;
  std::string word = e.name;
  if (word.size() > kCategorySuffix.size() && word.ends_with(kCategorySuffix)) {
    word.resize(word.size() - kCategorySuffix.size());
  }
  for (auto& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return word;
}

namespace {

struct AliasEntry {
  std::string name;
  EntityKind kind;
  std::vector<std::string> aliases;
};

std::vector<AliasEntry> read_aliases(const std::filesystem::path& path) {
  std::vector<AliasEntry> out;
  if (path.empty()) return out;
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open alias file " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path.string() + ": invalid JSON: " + e.what(), lineno);
    }
    if (!j.is_object() || !j.contains("entity") || !j["entity"].is_string()) {
      throw ParseError(path.string() + ": missing string field \"entity\"", lineno);
    }
    AliasEntry entry{j["entity"].get<std::string>(), EntityKind::item, {}};
    if (entry.name.empty()) throw ParseError(path.string() + ": empty entity name", lineno);
    if (j.contains("kind")) {
      auto kind = j["kind"].is_string() ? parse_entity_kind(j["kind"].get<std::string>()) : std::nullopt;
      if (!kind) throw ParseError(path.string() + ": bad \"kind\"", lineno);
      entry.kind = *kind;
    }
    if (j.contains("aliases")) {
      if (!j["aliases"].is_array()) throw ParseError(path.string() + ": \"aliases\" must be an array", lineno);
      for (const auto& a : j["aliases"]) {
        if (!a.is_string()) throw ParseError(path.string() + ": alias must be a string", lineno);
        entry.aliases.push_back(a.get<std::string>());
      }
    }
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace

KnowledgeGraph load_triples(const std::filesystem::path& triples_path,
                            const std::filesystem::path& alias_path, LoadReport* report) {
  LoadReport local;
  LoadReport& rep = report ? *report : local;
  rep = LoadReport{};

  const auto lexicon = read_aliases(alias_path);
  std::unordered_map<std::string, EntityKind> declared;
  for (const auto& e : lexicon) declared.emplace(e.name, e.kind);

  KnowledgeGraph g;
  for (auto name : kRetainedRelations) g.add_relation(std::string(name));

  std::ifstream in(triples_path);
  if (!in) throw NotFoundError("cannot open triple file " + triples_path.string());

  auto intern = [&](const std::string& name, EntityKind role) {
    if (auto id = g.find_entity(name)) {
      auto want = declared.count(name) ? declared.at(name) : role;
      if (g.kind(*id) != want) ++rep.kind_conflicts;
      return *id;
    }
    auto it = declared.find(name);
    return g.add_entity(name, it != declared.end() ? it->second : role);
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++rep.lines;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
      throw ParseError(triples_path.string() + ": expected 3 tab-separated fields", lineno);
    }
    std::string head = line.substr(0, t1);
    std::string rel = line.substr(t1 + 1, t2 - t1 - 1);
    std::string tail = line.substr(t2 + 1);
    if (head.empty() || rel.empty() || tail.empty()) {
      throw ParseError(triples_path.string() + ": empty field", lineno);
    }
    auto r = g.find_relation(rel);
    if (!r) throw RejectedRelationError(rel, lineno);
    if (head == tail) {
      ++rep.self_loops;
      continue;
    }
    const EntityId h = intern(head, EntityKind::item);
    const EntityId t = intern(tail, EntityKind::attribute);
    if (!g.add_triple(h, *r, t)) ++rep.duplicate_triples;
  }

  for (const auto& e : lexicon) {
    const EntityId id = g.add_entity(e.name, e.kind);
    g.set_aliases(id, e.aliases);
  }
  return g;
}

KnowledgeGraph expand_graph(const KnowledgeGraph& g) {
  if (g.expanded()) return g;
  KnowledgeGraph out = g;

  std::vector<std::pair<RelationId, RelationId>> inverse_of_forward;
  std::vector<EntityId> category_of_forward;
  for (auto name : kRetainedRelations) {
    const RelationId fwd = out.add_relation(std::string(name));
    inverse_of_forward.emplace_back(fwd, RelationId{});
  }
  for (std::size_t i = 0; i < kRetainedRelations.size(); ++i) {
    const RelationId inv = out.add_relation(inverse_name(kRetainedRelations[i]));
    out.set_inverse(inverse_of_forward[i].first, inv);
    inverse_of_forward[i].second = inv;
  }
  const RelationId belong = out.add_relation(std::string(kBelongRelation));
  const RelationId belong_inv = out.add_relation(inverse_name(kBelongRelation));
  out.set_inverse(belong, belong_inv);

  for (auto name : kRetainedRelations) {
    const std::string cname = category_name(name);
    const EntityId c = out.add_entity(cname, EntityKind::category);
    if (out.kind(c) != EntityKind::category) {
      throw ConfigError("entity \"" + cname + "\" is reserved for a category but has kind " +
                        std::string(to_string(out.kind(c))));
    }
    category_of_forward.push_back(c);
  }

  const std::vector<Triple> forward(g.triples().begin(), g.triples().end());
  for (const auto& t : forward) {
    for (std::size_t i = 0; i < inverse_of_forward.size(); ++i) {
      if (inverse_of_forward[i].first != t.relation) continue;
      out.add_triple(t.tail, inverse_of_forward[i].second, t.head);
      out.add_triple(t.tail, belong, category_of_forward[i]);
      out.add_triple(category_of_forward[i], belong_inv, t.tail);
    }
  }
  out.mark_expanded();
  return out;
}

namespace {

constexpr char kMagic[8] = {'K', 'E', 'C', 'R', 'K', 'G', '0', '1'};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}
  std::uint8_t u8() {
    const int c = in_.get();
    if (c == std::char_traits<char>::eof()) throw ParseError(source_ + ": truncated graph file", 0);
    return static_cast<std::uint8_t>(c);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    std::string s(n, '\0');
    in_.read(s.data(), n);
    if (static_cast<std::uint32_t>(in_.gcount()) != n) {
      throw ParseError(source_ + ": truncated graph file", 0);
    }
    return s;
  }

 private:
  std::istream& in_;
  std::string source_;
};

}  // namespace

void save_graph(const KnowledgeGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NotFoundError("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  Writer w(out);
  w.u8(g.expanded() ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(g.relation_count()));
  for (const auto& r : g.relations()) {
    w.str(r.name);
    w.u8(r.inverse_of ? 1 : 0);
    w.u32(r.inverse_of ? r.inverse_of->value : 0);
  }
  w.u32(static_cast<std::uint32_t>(g.entity_count()));
  for (const auto& e : g.entities()) {
    w.str(e.name);
    w.u8(static_cast<std::uint8_t>(e.kind));
    w.u32(static_cast<std::uint32_t>(e.aliases.size()));
    for (const auto& a : e.aliases) w.str(a);
  }
  w.u32(static_cast<std::uint32_t>(g.triple_count()));
  for (const auto& t : g.triples()) {
    w.u32(t.head.value);
    w.u32(t.relation.value);
    w.u32(t.tail.value);
  }
  if (!out) throw Error("failed writing " + path.string());
}

KnowledgeGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open graph file " + path.string());
  char magic[sizeof(kMagic)] = {};
  in.read(magic, sizeof(magic));
  if (!std::equal(std::begin(magic), std::end(magic), std::begin(kMagic))) {
    throw ParseError(path.string() + ": not a graph file", 0);
  }
  Reader r(in, path.string());
  KnowledgeGraph g;
  const bool expanded = r.u8() != 0;
  const std::uint32_t nrel = r.u32();
  std::vector<std::optional<std::uint32_t>> inverses;
  for (std::uint32_t i = 0; i < nrel; ++i) {
    g.add_relation(r.str());
    const bool has = r.u8() != 0;
    const std::uint32_t inv = r.u32();
    inverses.push_back(has ? std::optional(inv) : std::nullopt);
  }
  if (g.relation_count() != nrel) throw ParseError(path.string() + ": duplicate relation name", 0);
  for (std::uint32_t i = 0; i < nrel; ++i) {
    if (!inverses[i]) continue;
    if (*inverses[i] >= nrel) throw ParseError(path.string() + ": bad inverse id", 0);
    g.set_inverse(RelationId{i}, RelationId{*inverses[i]});
  }
  const std::uint32_t nent = r.u32();
  for (std::uint32_t i = 0; i < nent; ++i) {
    std::string name = r.str();
    const std::uint8_t kind = r.u8();
    if (kind > 2) throw ParseError(path.string() + ": bad entity kind", 0);
    const EntityId id = g.add_entity(std::move(name), static_cast<EntityKind>(kind));
    if (id.value != i) throw ParseError(path.string() + ": duplicate entity name", 0);
    std::vector<std::string> aliases(r.u32());
    for (auto& a : aliases) a = r.str();
    g.set_aliases(id, std::move(aliases));
  }
  const std::uint32_t ntri = r.u32();
  for (std::uint32_t i = 0; i < ntri; ++i) {
    const std::uint32_t h = r.u32();
    const std::uint32_t rel = r.u32();
    const std::uint32_t t = r.u32();
    if (h >= nent || t >= nent || rel >= nrel) throw ParseError(path.string() + ": bad triple", 0);
    g.add_triple(EntityId{h}, RelationId{rel}, EntityId{t});
  }
  if (expanded) g.mark_expanded();
  return g;
}

}  // namespace kecr
