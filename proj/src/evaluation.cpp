// SPDX-License-Identifier: Apache-2.0
#include "kecr/evaluation.hpp"

#include <fstream>

#include "kecr/errors.hpp"
#include "kecr/metrics.hpp"
#include "kecr/policy.hpp"

namespace kecr {

EvaluationReport evaluate(const Engine& engine, const std::vector<PreparedConversation>& corpus) {
  const KnowledgeGraph& g = engine.graph();
  EvaluationReport report;
  std::vector<std::string> candidates;
  std::vector<std::vector<std::string>> references;
  std::size_t policy_hits = 0;
  std::size_t step1_hits = 0;
  double r1 = 0.0;
  double r10 = 0.0;

  for (std::size_t c = 0; c < corpus.size(); ++c) {
    const auto& conv = corpus[c];
    DialogueState state = DialogueState::initial(engine.config().embed_dim);
    for (std::size_t r = 0; r < conv.rounds.size(); ++r) {
      const Round& round = conv.rounds[r];
      state = engine.observe(std::move(state), conv.inputs[r], round.entities);
      if (!round.target || !round.reply_turn) continue;
      const Action gold = *round.target;
      const std::uint64_t seed = mix_seed(mix_seed(engine.config().seed, c), r);
      const Tensor probs = engine.action_probs(state);
      const Action predicted = argmax_action(probs);
      ++report.rounds;
      if (predicted == gold) ++policy_hits;

      const Decision generated = engine.decide(state, probs, predicted, seed);
      const Decision forced = predicted == gold ? generated : engine.decide(state, probs, gold, seed);
      const Turn& reply = conv.record.turns[*round.reply_turn];
      candidates.push_back(generated.reply);
      references.push_back({reply.text});

      for (const auto& label : conv.labels) {
        if (label.turn != *round.reply_turn) continue;
        ++report.reasoning_rounds;
        if (forced.step1 && forced.step1->entity == label.first_target) ++step1_hits;
      }
      if (gold == Action::recommend) {
        std::optional<EntityId> gold_item;
        for (auto e : reply.entities) {
          if (g.kind(e) == EntityKind::item) {
            gold_item = e;
            break;
          }
        }
        if (gold_item) {
          std::vector<EntityId> ranked;
          for (const auto& s : forced.top_items) ranked.push_back(s.entity);
          r1 += recall_at_k(ranked, *gold_item, 1);
          r10 += recall_at_k(ranked, *gold_item, 10);
          ++report.recommend_rounds;
        }
      }
      state.last_action = generated.action;
    }
  }

  auto ratio = [](double num, std::size_t den) { return den == 0 ? 0.0 : num / static_cast<double>(den); };
  report.policy_accuracy = ratio(static_cast<double>(policy_hits), report.rounds);
  report.step1_accuracy = ratio(static_cast<double>(step1_hits), report.reasoning_rounds);
  report.recall_at_1 = ratio(r1, report.recommend_rounds);
  report.recall_at_10 = ratio(r10, report.recommend_rounds);
  report.dist2 = distinct_n(candidates, 2);
  report.dist3 = distinct_n(candidates, 3);
  report.dist4 = distinct_n(candidates, 4);
  report.bleu = candidates.empty() ? 0.0 : corpus_bleu(candidates, references);
  report.generated = std::move(candidates);
  return report;
}

nlohmann::ordered_json report_to_json(const EvaluationReport& report) {
  nlohmann::ordered_json j;
  j["recall@1"] = report.recall_at_1;
  j["recall@10"] = report.recall_at_10;
  j["dist-2"] = report.dist2;
  j["dist-3"] = report.dist3;
  j["dist-4"] = report.dist4;
  j["bleu"] = report.bleu;
  j["policy_accuracy"] = report.policy_accuracy;
  j["step1_accuracy"] = report.step1_accuracy;
  j["rounds"] = report.rounds;
  return j;
}

void write_metrics(const std::filesystem::path& path, const EvaluationReport& report) {
  std::ofstream out(path);
  if (!out) throw NotFoundError("cannot write " + path.string());
  out << report_to_json(report).dump(2) << '\n';
}

}  // namespace kecr
