// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "kecr/config.hpp"
#include "kecr/mi_pretrainer.hpp"
#include "kecr/model.hpp"
#include "kecr/params.hpp"

namespace kecr {

class KnowledgeGraph;

struct DataSplit {
  std::vector<PreparedConversation> train;
  std::vector<PreparedConversation> validation;
  std::vector<PreparedConversation> test;
};

/// 8:1:1 by conversation after a seeded shuffle; validation and test get
/// floor(n/10) conversations each.
DataSplit split_corpus(std::vector<PreparedConversation> corpus, std::uint64_t seed);

struct JointEpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
  double train_action_accuracy = 0.0;
};

/// Rounds with a target action, in corpus order.
struct LabeledRound {
  std::size_t conversation = 0;
  std::size_t round = 0;
  Action target = Action::chat;
  /// Reasoning label of the reply, when one was derived.
  const ReasoningLabel* label = nullptr;
};
std::vector<LabeledRound> labeled_rounds(const std::vector<PreparedConversation>& corpus);

/// Mean of L_a + L_r over the labeled rounds, no update.
double joint_loss(const std::vector<PreparedConversation>& corpus, const KnowledgeGraph& g,
                  const ParameterStore& store, const Config& cfg);

/// Runs the joint phase for cfg.joint_epochs epochs on `train`, minimizing
/// L_a + L_r per batch of cfg.batch_joint labeled rounds. Policy,
/// preference and scorer parameters are updated; the graph encoder and GRU
/// too when cfg.finetune_encoders is set. With a nonempty validation set,
/// training stops after cfg.patience epochs without improvement and the
/// best parameters are restored. Throws TrainingError without labeled rounds.
std::vector<JointEpochStats> train_joint(const std::vector<PreparedConversation>& train,
                                         const std::vector<PreparedConversation>& validation,
                                         const KnowledgeGraph& g, ParameterStore& store, const Config& cfg);

struct TrainResult {
  ParameterStore params;
  std::vector<MIEpochStats> pretrain_trace;
  std::vector<JointEpochStats> joint_trace;
};

/// Full schedule: initialize from cfg.seed, split, pretrain on the training
/// split, then joint training.
TrainResult train(const std::vector<PreparedConversation>& corpus, const KnowledgeGraph& g, const Config& cfg);

void write_joint_trace(const std::filesystem::path& path, const std::vector<JointEpochStats>& trace);

}  // namespace kecr
