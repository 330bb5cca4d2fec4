// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include "kecr/config.hpp"
#include "kecr/params.hpp"

namespace kecr {

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  Config config;
  ParameterStore params;
};

/// JSON document with format_version, config_echo, params and
/// optimizer_state. Keys are emitted in a fixed order and doubles in their
/// shortest round-trip form, so equal inputs give equal bytes.
std::string checkpoint_to_string(const Config& cfg, const ParameterStore& params);
Checkpoint checkpoint_from_string(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Config& cfg, const ParameterStore& params);
/// Throws NotFoundError naming the path when the file is missing.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace kecr
