// SPDX-License-Identifier: Apache-2.0
#include "kecr/trainer.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include <spdlog/spdlog.h>

#include "kecr/errors.hpp"
#include "kecr/graph_encoder.hpp"
#include "kecr/kg.hpp"
#include "kecr/policy.hpp"
#include "kecr/preference.hpp"
#include "kecr/reasoner.hpp"

namespace kecr {

DataSplit split_corpus(std::vector<PreparedConversation> corpus, std::uint64_t seed) {
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(mix_seed(seed, 0x73706c6974ULL));
  rng.shuffle(order);
  const std::size_t n_val = corpus.size() / 10;
  const std::size_t n_test = corpus.size() / 10;
  const std::size_t n_train = corpus.size() - n_val - n_test;
  DataSplit split;
  for (std::size_t k = 0; k < order.size(); ++k) {
    auto& conv = corpus[order[k]];
    if (k < n_train) {
      split.train.push_back(std::move(conv));
    } else if (k < n_train + n_val) {
      split.validation.push_back(std::move(conv));
    } else {
      split.test.push_back(std::move(conv));
    }
  }
  return split;
}

std::vector<LabeledRound> labeled_rounds(const std::vector<PreparedConversation>& corpus) {
  std::vector<LabeledRound> out;
  for (std::size_t c = 0; c < corpus.size(); ++c) {
    const auto& conv = corpus[c];
    for (std::size_t r = 0; r < conv.rounds.size(); ++r) {
      const Round& round = conv.rounds[r];
      if (!round.target) continue;
      LabeledRound lr{c, r, *round.target, nullptr};
      for (const auto& label : conv.labels) {
        if (round.reply_turn && label.turn == *round.reply_turn) lr.label = &label;
      }
      out.push_back(lr);
    }
  }
  return out;
}

namespace {

/// Belief entities visible at round r: every mention of rounds 0..r.
std::vector<EntityId> belief_entities(const PreparedConversation& conv, std::size_t r) {
  std::vector<EntityId> out;
  for (std::size_t k = 0; k <= r; ++k) {
    out.insert(out.end(), conv.rounds[k].entities.begin(), conv.rounds[k].entities.end());
  }
  return out;
}

double round_loss_value(const PreparedConversation& conv, const LabeledRound& lr, const Tensor& q,
                        const Tensor& E, const KnowledgeGraph& g, const ParameterStore& store, const Config& cfg) {
  const Tensor a = predict_action(policy_params(store), q);
  double loss = policy_loss(a, lr.target);
  if (lr.label) {
    auto ents = belief_entities(conv, lr.round);
    if (ents.empty()) ents.push_back(lr.label->start);
    Tensor D({E.cols(), ents.size()});
    for (std::size_t j = 0; j < ents.size(); ++j) {
      for (std::size_t i = 0; i < E.cols(); ++i) D.at(i, j) = E.at(ents[j].index(), i);
    }
    const Tensor u = mine_preference(preference_params(store), cfg.gamma, D, cfg.damping_normalize);
    const RelevanceScorer scorer(store.value("reasoner.Wproj"), E, context_vector(a, u, q));
    loss += reasoning_loss(scorer, g, *lr.label, cfg.lambda);
  }
  return loss;
}

}  // namespace

double joint_loss(const std::vector<PreparedConversation>& corpus, const KnowledgeGraph& g,
                  const ParameterStore& store, const Config& cfg) {
  const auto rounds = labeled_rounds(corpus);
  if (rounds.empty()) return 0.0;
  const Tensor E = encode_entities(g, store, cfg);
  const GruWeights gru = gru_weights(store);
  std::vector<std::vector<Tensor>> contexts;
  for (const auto& conv : corpus) contexts.push_back(unroll_contexts(conv, gru));
  double total = 0.0;
  for (const auto& lr : rounds) {
    total += round_loss_value(corpus[lr.conversation], lr, contexts[lr.conversation][lr.round], E, g, store, cfg);
  }
  return total / static_cast<double>(rounds.size());
}

std::vector<JointEpochStats> train_joint(const std::vector<PreparedConversation>& train,
                                         const std::vector<PreparedConversation>& validation,
                                         const KnowledgeGraph& g, ParameterStore& store, const Config& cfg) {
  std::vector<JointEpochStats> trace;
  if (cfg.joint_epochs == 0) return trace;
  auto rounds = labeled_rounds(train);
  if (rounds.empty()) throw TrainingError("joint training needs at least one round followed by a labeled reply");

  const AdamOptions opts{cfg.lr, cfg.weight_decay};
  const ParameterFilter select = cfg.finetune_encoders
                                     ? prefix_filter({"policy.", "pref.", "reasoner.", "graph.", "context."})
                                     : prefix_filter({"policy.", "pref.", "reasoner."});
  const bool finetune = cfg.finetune_encoders;

  // Frozen encoders: embeddings and contexts are fixed for the whole phase.
  Tensor E_fixed;
  std::vector<std::vector<Tensor>> contexts_fixed;
  if (!finetune) {
    E_fixed = encode_entities(g, store, cfg);
    const GruWeights gru = gru_weights(store);
    for (const auto& conv : train) contexts_fixed.push_back(unroll_contexts(conv, gru));
  }

  std::optional<ParameterStore> best;
  double best_val = INFINITY;
  std::size_t since_best = 0;
  Rng rng(mix_seed(cfg.seed, 0x6a6f696e74ULL));

  for (std::size_t epoch = 0; epoch < cfg.joint_epochs; ++epoch) {
    rng.shuffle(rounds);
    JointEpochStats stats;
    stats.epoch = epoch + 1;
    std::size_t correct = 0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < rounds.size(); start += cfg.batch_joint) {
      const std::size_t end = std::min(rounds.size(), start + cfg.batch_joint);
      ad::Tape tape;
      std::optional<ad::Var> E;
      std::optional<ad::GruVars> gru;
      if (finetune) {
        E = encode_entities(tape, g, store, cfg);
        gru = gru_vars(tape, store);
      }
      std::map<std::uint32_t, ad::Var> rows;
      const RowFn row = [&](EntityId e) {
        auto it = rows.find(e.value);
        if (it != rows.end()) return it->second;
        ad::Var v;
        if (finetune) {
          v = ad::row(*E, e.index());
        } else {
          auto r = E_fixed.row(e.index());
          v = tape.constant(Tensor::vector(std::vector<double>(r.begin(), r.end())));
        }
        rows.emplace(e.value, v);
        return v;
      };
      std::map<std::size_t, std::vector<ad::Var>> unrolled;
      auto context = [&](std::size_t c, std::size_t r) {
        if (!finetune) return tape.constant(contexts_fixed[c][r]);
        auto& qs = unrolled[c];
        if (qs.empty()) qs.push_back(tape.constant(Tensor({cfg.embed_dim})));
        while (qs.size() <= r + 1) {
          qs.push_back(ad::gru_cell(*gru, qs.back(), tape.constant(train[c].inputs[qs.size() - 1])));
        }
        return qs[r + 1];
      };
      ad::Var Wproj = tape.param(store, "reasoner.Wproj");

      std::vector<ad::Var> losses;
      for (std::size_t k = start; k < end; ++k) {
        const LabeledRound& lr = rounds[k];
        ad::Var q = context(lr.conversation, lr.round);
        ad::Var a = predict_action(tape, store, q);
        if (argmax_action(a.value()) == lr.target) ++correct;
        ad::Var loss = policy_loss(a, lr.target);
        if (lr.label) {
          std::vector<ad::Var> cols;
          for (auto e : belief_entities(train[lr.conversation], lr.round)) cols.push_back(row(e));
          if (cols.empty()) cols.push_back(row(lr.label->start));
          ad::Var u = mine_preference(tape, store, cfg.gamma, cols, cfg.damping_normalize);
          ad::Var hc = ad::concat({a, u, q});
          loss = ad::add(loss, reasoning_loss(tape, Wproj, hc, row, g, *lr.label, cfg.lambda));
        }
        losses.push_back(loss);
      }
      ad::Var batch_loss = ad::scale(ad::add_n(losses), 1.0 / static_cast<double>(losses.size()));
      if (!std::isfinite(batch_loss.item())) throw TrainingError("joint loss is not finite");
      tape.backward(batch_loss);
      adam_step(store, opts, select);
      stats.train_loss += batch_loss.item();
      ++batches;
    }
    stats.train_loss /= static_cast<double>(batches);
    stats.train_action_accuracy = static_cast<double>(correct) / static_cast<double>(rounds.size());
    const bool have_val = !labeled_rounds(validation).empty();
    stats.validation_loss = have_val ? joint_loss(validation, g, store, cfg) : stats.train_loss;
    spdlog::info("joint epoch {}: train {:.6f} val {:.6f} acc {:.4f}", stats.epoch, stats.train_loss,
                 stats.validation_loss, stats.train_action_accuracy);
    trace.push_back(stats);

    if (have_val) {
      if (stats.validation_loss < best_val) {
        best_val = stats.validation_loss;
        best = store;
        since_best = 0;
      } else if (++since_best >= cfg.patience && cfg.patience > 0) {
        spdlog::info("early stop after epoch {}", stats.epoch);
        break;
      }
    }
  }
  if (best) store = std::move(*best);
  return trace;
}

TrainResult train(const std::vector<PreparedConversation>& corpus, const KnowledgeGraph& g, const Config& cfg) {
  cfg.validate();
  TrainResult result;
  result.params = init_model(g, cfg);
  DataSplit split = split_corpus(corpus, cfg.seed);
  result.pretrain_trace = pretrain(split.train, g, result.params, cfg);
  result.joint_trace = train_joint(split.train, split.validation, g, result.params, cfg);
  return result;
}

void write_joint_trace(const std::filesystem::path& path, const std::vector<JointEpochStats>& trace) {
  std::ofstream out(path);
  if (!out) throw NotFoundError("cannot write " + path.string());
  out << "epoch,train_loss,validation_loss,train_action_accuracy\n";
  out.precision(10);
  for (const auto& s : trace) {
    out << s.epoch << ',' << s.train_loss << ',' << s.validation_loss << ',' << s.train_action_accuracy << '\n';
  }
}

}  // namespace kecr
