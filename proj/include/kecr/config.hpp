// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

namespace kecr {

/// Graph convolution neighbor weighting: constant 1, or 1/|N_r(v)|.
enum class NormMode { constant, degree };

struct Config {
  std::size_t embed_dim = 128;
  std::size_t rgcn_layers = 1;
  NormMode norm_mode = NormMode::constant;
  double gamma = 0.95;
  double lambda = 0.3;
  double lr = 0.001;
  double weight_decay = 0.01;
  std::size_t pretrain_epochs = 10;
  std::size_t joint_epochs = 30;
  std::size_t batch_pretrain = 10;
  std::size_t batch_joint = 30;
  std::size_t neg_samples = 4;
  std::uint64_t seed = 42;
  bool finetune_encoders = false;
  bool damping_normalize = true;
  std::size_t hash_buckets = 50021;
  std::size_t patience = 3;
  std::size_t top_k = 10;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// `key = value` lines; '#' starts a comment. Unknown keys are an error.
Config parse_config(std::string_view text);
Config load_config(const std::filesystem::path& path);
std::string format_config(const Config& cfg);

nlohmann::ordered_json config_to_json(const Config& cfg);
Config config_from_json(const nlohmann::json& j);

}  // namespace kecr
