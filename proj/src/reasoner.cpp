// SPDX-License-Identifier: Apache-2.0
#include "kecr/reasoner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "kecr/errors.hpp"
#include "kecr/kg.hpp"
#include "kecr/numerics.hpp"
#include "kecr/rng.hpp"

namespace kecr {

namespace {
constexpr double kClamp = 1e-12;

bool better(const ScoredEntity& a, const ScoredEntity& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.entity < b.entity;
}
}  // namespace

void init_reasoner(ParameterStore& store, const Config& cfg, Rng& rng) {
  const std::size_t d = cfg.embed_dim;
  store.add_uniform("reasoner.Wproj", {2 * d, kActionCount + 2 * d}, kActionCount + 2 * d, rng);
}

Tensor context_vector(const Tensor& a, const Tensor& u, const Tensor& q) {
  std::vector<double> v(a.values().begin(), a.values().end());
  v.insert(v.end(), u.values().begin(), u.values().end());
  v.insert(v.end(), q.values().begin(), q.values().end());
  return Tensor::vector(std::move(v));
}

double relevance(const Tensor& Wproj, const Tensor& e_from, const Tensor& e_to, const Tensor& hc) {
  const std::size_t d = e_from.size();
  if (Wproj.rank() != 2 || Wproj.rows() != 2 * d || Wproj.cols() != hc.size() || e_to.size() != d) {
    throw ShapeError("relevance: W_proj " + shape_string(Wproj.shape()) + " vs h_k [" + std::to_string(2 * d) +
                     "] and h_c " + shape_string(hc.shape()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < 2 * d; ++i) {
    const double hk = i < d ? e_from[i] : e_to[i - d];
    double row = 0.0;
    for (std::size_t j = 0; j < hc.size(); ++j) row += Wproj.at(i, j) * hc[j];
    s += hk * row;
  }
  return sigmoid(s);
}

RelevanceScorer::RelevanceScorer(const Tensor& Wproj, const Tensor& embeddings, const Tensor& hc)
    : embeddings_(embeddings), d_(embeddings.cols()) {
  if (embeddings.rank() != 2 || Wproj.rank() != 2 || Wproj.rows() != 2 * d_ || Wproj.cols() != hc.size()) {
    throw ShapeError("relevance scorer: W_proj " + shape_string(Wproj.shape()) + ", embeddings " +
                     shape_string(embeddings.shape()) + ", h_c " + shape_string(hc.shape()));
  }
  projected_ = linear(Wproj, hc);
}

double RelevanceScorer::score(EntityId from, EntityId to) const {
  if (from.index() >= embeddings_.rows() || to.index() >= embeddings_.rows()) {
    throw NotFoundError("entity without embedding row");
  }
  auto a = embeddings_.row(from.index());
  auto b = embeddings_.row(to.index());
  double s = 0.0;
  for (std::size_t i = 0; i < d_; ++i) s += a[i] * projected_[i];
  for (std::size_t i = 0; i < d_; ++i) s += b[i] * projected_[d_ + i];
  return sigmoid(s);
}

namespace {

std::vector<EntityId> distinct_neighbors(const KnowledgeGraph& g, EntityId v) {
  std::vector<EntityId> out;
  for (const auto& n : g.neighbors(v)) out.push_back(n.entity);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

std::vector<ScoredEntity> score_neighbors(const RelevanceScorer& scorer, const KnowledgeGraph& g, EntityId start) {
  const auto nbrs = distinct_neighbors(g, start);
  if (nbrs.empty()) throw NoNeighborsError("entity '" + g.name(start) + "' has no neighbors");
  std::vector<ScoredEntity> out;
  out.reserve(nbrs.size());
  for (auto k : nbrs) out.push_back(ScoredEntity{k, scorer.score(start, k)});
  std::stable_sort(out.begin(), out.end(), better);
  return out;
}

EntityId pick_start(const DialogueState& state, const KnowledgeGraph& g, std::uint64_t seed) {
  Rng rng(seed);
  if (!state.mention_groups.empty()) {
    const auto& group = state.mention_groups.back();
    return group.size() == 1 ? group.front() : group[rng.index(group.size())];
  }
  const auto cats = g.categories();
  if (cats.empty()) throw CannotStartError();
  return cats[rng.index(cats.size())];
}

namespace {

using Filter = std::function<bool(EntityId)>;

std::vector<Filter> step1_tiers(const KnowledgeGraph& g, Action action, const std::set<EntityId>& mentioned) {
  auto is_item = [&g](EntityId e) { return g.kind(e) == EntityKind::item; };
  auto fresh = [&mentioned](EntityId e) { return mentioned.count(e) == 0; };
  std::vector<Filter> tiers;
  if (action == Action::recommend) {
    tiers.push_back([=](EntityId e) { return is_item(e) && fresh(e); });
    tiers.push_back(is_item);
  } else if (action == Action::query) {
    tiers.push_back([=](EntityId e) { return !is_item(e) && fresh(e); });
    tiers.push_back([=](EntityId e) { return !is_item(e); });
  }
  tiers.push_back([](EntityId) { return true; });
  return tiers;
}

std::vector<ScoredEntity> filtered(const std::vector<ScoredEntity>& all, const Filter& keep) {
  std::vector<ScoredEntity> out;
  for (const auto& s : all) {
    if (keep(s.entity)) out.push_back(s);
  }
  return out;
}

}  // namespace

ReasoningResult reason_two_step(const RelevanceScorer& scorer, const KnowledgeGraph& g, const DialogueState& state,
                                Action action, std::uint64_t seed) {
  const std::set<EntityId> mentioned(state.mentioned.begin(), state.mentioned.end());
  const EntityId picked = pick_start(state, g, seed);
  Rng rng(mix_seed(seed, 1));

  std::vector<EntityId> starts{picked};
  if (!state.mention_groups.empty()) {
    std::vector<EntityId> mates;
    for (auto e : state.mention_groups.back()) {
      if (e != picked && std::find(mates.begin(), mates.end(), e) == mates.end()) mates.push_back(e);
    }
    rng.shuffle(mates);
    starts.insert(starts.end(), mates.begin(), mates.end());
  }
  auto connected = [&](const std::vector<EntityId>& list) {
    std::vector<EntityId> out;
    for (auto e : list) {
      if (!g.neighbors(e).empty()) out.push_back(e);
    }
    return out;
  };
  starts = connected(starts);
  if (starts.empty()) {
    auto cats = g.categories();
    rng.shuffle(cats);
    starts = connected(cats);
  }
  if (starts.empty()) throw NoPathError("no reachable start entity");

  std::map<EntityId, std::vector<ScoredEntity>> scored;
  auto ranked = [&](EntityId s) -> const std::vector<ScoredEntity>& {
    auto it = scored.find(s);
    if (it == scored.end()) it = scored.emplace(s, score_neighbors(scorer, g, s)).first;
    return it->second;
  };

  ReasoningResult result;
  result.action = action;
  bool found = false;
  for (const auto& tier : step1_tiers(g, action, mentioned)) {
    for (auto s : starts) {
      auto cands = filtered(ranked(s), tier);
      if (cands.empty()) continue;
      result.start = s;
      result.step1 = cands.front();
      result.candidates1 = std::move(cands);
      found = true;
      break;
    }
    if (found) break;
  }
  if (!found) throw NoPathError("no neighbor satisfies the reasoning constraints");

  if (action == Action::recommend) {
    const EntityId s1 = result.step1.entity;
    const EntityId s0 = result.start;
    std::vector<ScoredEntity> pool;
    if (!g.neighbors(s1).empty()) {
      pool = filtered(ranked(s1), [&](EntityId e) { return e != s0 && e != s1; });
    }
    auto attrs = filtered(pool, [&](EntityId e) { return g.kind(e) == EntityKind::attribute; });
    auto& chosen = attrs.empty() ? pool : attrs;
    if (!chosen.empty()) {
      result.step2 = chosen.front();
      result.relation = g.relation_between(s1, chosen.front().entity);
      result.candidates2 = std::move(chosen);
    }
  }
  return result;
}

std::vector<ScoredEntity> rank_items(const RelevanceScorer& scorer, const KnowledgeGraph& g,
                                     const DialogueState& state, EntityId start, std::size_t k) {
  const std::set<EntityId> mentioned(state.mentioned.begin(), state.mentioned.end());
  auto eligible = [&](EntityId e) { return g.kind(e) == EntityKind::item && mentioned.count(e) == 0; };

  // Best path product from `from` to each item within two hops.
  auto reach = [&](EntityId from, std::map<EntityId, double>& best) {
    for (auto b : distinct_neighbors(g, from)) {
      const double s1 = scorer.score(from, b);
      if (eligible(b) && b != from) {
        auto& slot = best[b];
        slot = std::max(slot, s1);
      }
      for (auto i : distinct_neighbors(g, b)) {
        if (i == from || !eligible(i)) continue;
        auto& slot = best[i];
        slot = std::max(slot, s1 * scorer.score(b, i));
      }
    }
  };
  auto sorted = [](const std::map<EntityId, double>& m) {
    std::vector<ScoredEntity> out;
    for (const auto& [e, s] : m) out.push_back(ScoredEntity{e, s});
    std::stable_sort(out.begin(), out.end(), better);
    return out;
  };

  std::vector<ScoredEntity> out;
  if (!mentioned.empty()) {
    std::map<EntityId, double> primary;
    reach(start, primary);
    out = sorted(primary);
    std::map<EntityId, double> secondary;
    for (auto m : mentioned) {
      if (m != start) reach(m, secondary);
    }
    for (const auto& [e, _] : primary) secondary.erase(e);
    for (const auto& s : sorted(secondary)) out.push_back(s);
  }
  if (out.empty()) {
    std::map<EntityId, double> all;
    for (auto i : g.entities_of_kind(EntityKind::item)) {
      if (eligible(i) && i != start) all[i] = scorer.score(start, i);
    }
    out = sorted(all);
  }
  if (out.size() > k) out.resize(k);
  return out;
}

double neighbor_bce(const std::vector<ScoredEntity>& scored, EntityId gold) {
  double loss = 0.0;
  for (const auto& s : scored) {
    const double p = s.entity == gold ? s.score : 1.0 - s.score;
    loss -= std::log(std::max(p, kClamp));
  }
  return loss;
}

double reasoning_loss(const RelevanceScorer& scorer, const KnowledgeGraph& g, const ReasoningLabel& label,
                      double lambda) {
  double loss = neighbor_bce(score_neighbors(scorer, g, label.start), label.first_target);
  if (label.second_target && lambda != 0.0) {
    loss += lambda * neighbor_bce(score_neighbors(scorer, g, label.first_target), *label.second_target);
  }
  return loss;
}

namespace {

ad::Var step_bce(ad::Var projected, const RowFn& row, const KnowledgeGraph& g, EntityId from, EntityId gold) {
  const auto nbrs = distinct_neighbors(g, from);
  if (nbrs.empty()) throw NoNeighborsError("entity '" + g.name(from) + "' has no neighbors");
  ad::Var e_from = row(from);
  std::vector<ad::Var> terms;
  for (auto k : nbrs) {
    ad::Var j = ad::sigmoid(ad::dot(ad::concat({e_from, row(k)}), projected));
    terms.push_back(ad::log(k == gold ? j : ad::one_minus(j), kClamp));
  }
  return ad::scale(ad::add_n(terms), -1.0);
}

}  // namespace

ad::Var reasoning_loss(ad::Tape&, ad::Var Wproj, ad::Var hc, const RowFn& row, const KnowledgeGraph& g,
                       const ReasoningLabel& label, double lambda) {
  ad::Var projected = ad::matvec(Wproj, hc);
  ad::Var loss = step_bce(projected, row, g, label.start, label.first_target);
  if (label.second_target && lambda != 0.0) {
    loss = ad::add(loss, ad::scale(step_bce(projected, row, g, label.first_target, *label.second_target), lambda));
  }
  return loss;
}

}  // namespace kecr
