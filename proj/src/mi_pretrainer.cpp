// SPDX-License-Identifier: Apache-2.0
#include "kecr/mi_pretrainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <spdlog/spdlog.h>

#include "kecr/errors.hpp"
#include "kecr/graph_encoder.hpp"
#include "kecr/kg.hpp"
#include "kecr/numerics.hpp"

namespace kecr {

void init_mi_classifier(ParameterStore& store, const Config& cfg, Rng& rng) {
  const std::size_t d = cfg.embed_dim;
  store.add_uniform("mi.W1", {d, 2 * d}, 2 * d, rng);
  store.add_uniform("mi.b1", {d}, 2 * d, rng);
  store.add_uniform("mi.w2", {1, d}, d, rng);
  store.add_uniform("mi.b2", {1}, d, rng);
}

double mi_classifier(const ParameterStore& store, const Tensor& e, const Tensor& q) {
  std::vector<double> joined(e.values().begin(), e.values().end());
  joined.insert(joined.end(), q.values().begin(), q.values().end());
  const Tensor h = kecr::tanh(linear(store.value("mi.W1"), Tensor::vector(std::move(joined)), &store.value("mi.b1")));
  return sigmoid(linear(store.value("mi.w2"), h, &store.value("mi.b2"))[0]);
}

ad::Var mi_classifier(ad::Tape& tape, ParameterStore& store, ad::Var e, ad::Var q, bool requires_grad) {
  auto p = [&](const char* name) { return tape.param(store, name, requires_grad); };
  ad::Var h = ad::tanh(ad::linear(p("mi.W1"), ad::concat({e, q}), p("mi.b1")));
  return ad::sigmoid(ad::linear(p("mi.w2"), h, p("mi.b2")));
}

double mi_objective(const std::vector<double>& pos, const std::vector<double>& neg) {
  double lp = 0.0;
  for (double g : pos) lp += std::log(std::max(g, kLogClamp));
  double ln = 0.0;
  for (double g : neg) ln += std::log(std::max(1.0 - g, kLogClamp));
  double out = 0.0;
  if (!pos.empty()) out += lp / static_cast<double>(pos.size());
  if (!neg.empty()) out += ln / static_cast<double>(neg.size());
  return out;
}

ad::Var mi_objective(ad::Tape& tape, const std::vector<ad::Var>& pos, const std::vector<ad::Var>& neg) {
  std::vector<ad::Var> terms;
  if (!pos.empty()) {
    std::vector<ad::Var> logs;
    for (const auto& g : pos) logs.push_back(ad::log(g, kLogClamp));
    terms.push_back(ad::scale(ad::add_n(logs), 1.0 / static_cast<double>(pos.size())));
  }
  if (!neg.empty()) {
    std::vector<ad::Var> logs;
    for (const auto& g : neg) logs.push_back(ad::log(ad::one_minus(g), kLogClamp));
    terms.push_back(ad::scale(ad::add_n(logs), 1.0 / static_cast<double>(neg.size())));
  }
  if (terms.empty()) return tape.constant(Tensor::scalar(0.0));
  return terms.size() == 1 ? terms.front() : ad::add(terms[0], terms[1]);
}

std::vector<MIBatch> build_mi_batches(const std::vector<PreparedConversation>& corpus, const KnowledgeGraph& g,
                                      std::size_t batch_rounds, std::size_t neg_samples, std::uint64_t seed) {
  if (batch_rounds == 0) throw ConfigError("MI batch size must be positive");
  if (g.entity_count() < neg_samples + 1) {
    throw SamplingError("need at least " + std::to_string(neg_samples + 1) + " entities for negative sampling, graph has " +
                        std::to_string(g.entity_count()));
  }
  std::vector<std::pair<std::size_t, std::size_t>> rounds;
  for (std::size_t c = 0; c < corpus.size(); ++c) {
    for (std::size_t r = 0; r < corpus[c].rounds.size(); ++r) {
      if (!corpus[c].rounds[r].entities.empty()) rounds.emplace_back(c, r);
    }
  }
  Rng rng(seed);
  rng.shuffle(rounds);

  std::vector<MIBatch> batches;
  const std::size_t n = g.entity_count();
  for (std::size_t start = 0; start < rounds.size(); start += batch_rounds) {
    MIBatch batch;
    for (std::size_t k = start; k < std::min(rounds.size(), start + batch_rounds); ++k) {
      const auto [c, r] = rounds[k];
      std::vector<EntityId> present = corpus[c].rounds[r].entities;
      std::sort(present.begin(), present.end());
      present.erase(std::unique(present.begin(), present.end()), present.end());
      if (n - present.size() < neg_samples) {
        throw SamplingError("round has too few non-mentioned entities for " + std::to_string(neg_samples) +
                            " negatives");
      }
      // Positives in mention order.
      std::vector<EntityId> seen;
      for (auto e : corpus[c].rounds[r].entities) {
        if (std::find(seen.begin(), seen.end(), e) != seen.end()) continue;
        seen.push_back(e);
        batch.positives.push_back(MIPair{e, c, r});
        std::vector<EntityId> drawn;
        while (drawn.size() < neg_samples) {
          const EntityId cand{static_cast<std::uint32_t>(rng.index(n))};
          if (std::binary_search(present.begin(), present.end(), cand)) continue;
          if (std::find(drawn.begin(), drawn.end(), cand) != drawn.end()) continue;
          drawn.push_back(cand);
        }
        for (auto neg : drawn) batch.negatives.push_back(MIPair{neg, c, r});
      }
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

double mi_loss(const ParameterStore& store, const MIBatch& batch, const Tensor& embeddings,
               const std::vector<std::vector<Tensor>>& contexts) {
  auto score = [&](const MIPair& p) {
    auto r = embeddings.row(p.entity.index());
    return mi_classifier(store, Tensor::vector(std::vector<double>(r.begin(), r.end())),
                         contexts.at(p.conversation).at(p.round));
  };
  std::vector<double> pos, neg;
  for (const auto& p : batch.positives) pos.push_back(score(p));
  for (const auto& p : batch.negatives) neg.push_back(score(p));
  return mi_objective(pos, neg);
}

namespace {

std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch) { return mix_seed(seed ^ 0x6d69ULL, epoch); }

}  // namespace

std::vector<MIEpochStats> pretrain(const std::vector<PreparedConversation>& corpus, const KnowledgeGraph& g,
                                   ParameterStore& store, const Config& cfg) {
  std::vector<MIEpochStats> trace;
  const AdamOptions opts{cfg.lr, cfg.weight_decay};
  const auto select = prefix_filter({"graph.", "context.", "mi."});
  for (std::size_t epoch = 0; epoch < cfg.pretrain_epochs; ++epoch) {
    const auto batches = build_mi_batches(corpus, g, cfg.batch_pretrain, cfg.neg_samples, epoch_seed(cfg.seed, epoch));
    MIEpochStats stats;
    stats.epoch = epoch + 1;
    double pos_sum = 0.0, neg_sum = 0.0;
    std::size_t pos_n = 0, neg_n = 0;
    for (const auto& batch : batches) {
      ad::Tape tape;
      ad::Var E = encode_entities(tape, g, store, cfg);
      ad::GruVars gru = gru_vars(tape, store);

      // Contexts unrolled on the tape, once per conversation in the batch.
      std::map<std::size_t, std::vector<ad::Var>> contexts;
      auto context = [&](std::size_t c, std::size_t r) {
        auto& qs = contexts[c];
        if (qs.empty()) qs.push_back(tape.constant(Tensor({cfg.embed_dim})));
        while (qs.size() <= r + 1) {
          qs.push_back(ad::gru_cell(gru, qs.back(), tape.constant(corpus[c].inputs[qs.size() - 1])));
        }
        return qs[r + 1];
      };
      std::map<std::uint32_t, ad::Var> rows;
      auto entity_row = [&](EntityId e) {
        auto it = rows.find(e.value);
        if (it == rows.end()) it = rows.emplace(e.value, ad::row(E, e.index())).first;
        return it->second;
      };
      std::vector<ad::Var> pos, neg;
      for (const auto& p : batch.positives) {
        pos.push_back(mi_classifier(tape, store, entity_row(p.entity), context(p.conversation, p.round)));
      }
      for (const auto& p : batch.negatives) {
        neg.push_back(mi_classifier(tape, store, entity_row(p.entity), context(p.conversation, p.round)));
      }
      ad::Var objective = mi_objective(tape, pos, neg);
      if (!std::isfinite(objective.item())) throw TrainingError("MI objective is not finite");
      tape.backward(ad::scale(objective, -1.0));
      adam_step(store, opts, select);

      stats.mean_objective += objective.item();
      for (const auto& v : pos) pos_sum += v.item();
      for (const auto& v : neg) neg_sum += v.item();
      pos_n += pos.size();
      neg_n += neg.size();
    }
    if (!batches.empty()) stats.mean_objective /= static_cast<double>(batches.size());
    stats.pos_mean_g = pos_n ? pos_sum / static_cast<double>(pos_n) : 0.0;
    stats.neg_mean_g = neg_n ? neg_sum / static_cast<double>(neg_n) : 0.0;
    spdlog::info("pretrain epoch {}: L_MI {:.6f} g+ {:.4f} g- {:.4f}", stats.epoch, stats.mean_objective,
                 stats.pos_mean_g, stats.neg_mean_g);
    trace.push_back(stats);
  }
  return trace;
}

MIEpochStats evaluate_mi(const std::vector<PreparedConversation>& corpus, const KnowledgeGraph& g,
                         const ParameterStore& store, const Config& cfg, std::uint64_t seed) {
  const Tensor E = encode_entities(g, store, cfg);
  const GruWeights gru = gru_weights(store);
  std::vector<std::vector<Tensor>> contexts;
  for (const auto& conv : corpus) contexts.push_back(unroll_contexts(conv, gru));
  const auto batches = build_mi_batches(corpus, g, cfg.batch_pretrain, cfg.neg_samples, seed);
  MIEpochStats stats;
  double pos_sum = 0.0, neg_sum = 0.0;
  std::size_t pos_n = 0, neg_n = 0;
  for (const auto& batch : batches) {
    stats.mean_objective += mi_loss(store, batch, E, contexts);
    for (const auto& p : batch.positives) {
      auto r = E.row(p.entity.index());
      pos_sum += mi_classifier(store, Tensor::vector({r.begin(), r.end()}), contexts[p.conversation][p.round]);
    }
    for (const auto& p : batch.negatives) {
      auto r = E.row(p.entity.index());
      neg_sum += mi_classifier(store, Tensor::vector({r.begin(), r.end()}), contexts[p.conversation][p.round]);
    }
    pos_n += batch.positives.size();
    neg_n += batch.negatives.size();
  }
  if (!batches.empty()) stats.mean_objective /= static_cast<double>(batches.size());
  stats.pos_mean_g = pos_n ? pos_sum / static_cast<double>(pos_n) : 0.0;
  stats.neg_mean_g = neg_n ? neg_sum / static_cast<double>(neg_n) : 0.0;
  return stats;
}

void write_mi_trace(const std::filesystem::path& path, const std::vector<MIEpochStats>& trace) {
  std::ofstream out(path);
  if (!out) throw NotFoundError("cannot write " + path.string());
  out << "epoch,mean_L_MI,pos_mean_g,neg_mean_g\n";
  out.precision(10);
  for (const auto& s : trace) {
    out << s.epoch << ',' << s.mean_objective << ',' << s.pos_mean_g << ',' << s.neg_mean_g << '\n';
  }
}

}  // namespace kecr
