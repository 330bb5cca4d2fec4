// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <vector>

#include "json.hpp"

#include "kecr/engine.hpp"
#include "kecr/model.hpp"

namespace kecr {

struct EvaluationReport {
  double recall_at_1 = 0.0;
  double recall_at_10 = 0.0;
  double dist2 = 0.0;
  double dist3 = 0.0;
  double dist4 = 0.0;
  double bleu = 0.0;
  /// Argmax action against the labeled wizard action.
  double policy_accuracy = 0.0;
  /// Step 1 against the first target of each reasoning label.
  double step1_accuracy = 0.0;
  std::size_t rounds = 0;
  std::size_t recommend_rounds = 0;
  std::size_t reasoning_rounds = 0;
  std::vector<std::string> generated;
};

/// Teacher-forced replay: every conversation is fed round by round with the
/// gold history. Replies are generated with the predicted action; step 1
/// and item ranking are scored under the labeled action. The gold item of a
/// recommend round is the first item the wizard reply mentions.
EvaluationReport evaluate(const Engine& engine, const std::vector<PreparedConversation>& corpus);

/// {recall@1, recall@10, dist-2, dist-3, dist-4, bleu, policy_accuracy,
/// step1_accuracy, rounds}.
nlohmann::ordered_json report_to_json(const EvaluationReport& report);
void write_metrics(const std::filesystem::path& path, const EvaluationReport& report);

}  // namespace kecr
