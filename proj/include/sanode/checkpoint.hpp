// Copyright 2026 The sanode Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "sanode/train.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace sanode {

enum class CheckpointEncoding
{
  Binary,
  Text
};

// Container layout:
//
//   sanode-checkpoint 1
//   key=value lines (encoding, model shape, training config, dataset
//   fingerprint in hex, epoch, parameter and history counts)
//   end
//
// followed by the canonical parameter array and then the loss history, either
// as little-endian f64 (binary) or one 17-significant-digit value per line (text).
std::string checkpoint_to_string(Checkpoint const &c, CheckpointEncoding encoding = CheckpointEncoding::Binary);

/// Throws VersionMismatch for another format version and CorruptFile for any
/// malformed or truncated input.
Checkpoint checkpoint_from_string(std::string const &bytes);

void save_checkpoint(Checkpoint const &c, std::filesystem::path const &path,
                     CheckpointEncoding encoding = CheckpointEncoding::Binary);
Checkpoint load_checkpoint(std::filesystem::path const &path);

/// Warning text when the checkpoint was trained on a different dataset.
std::optional<std::string> fingerprint_warning(Checkpoint const &c, TrajectoryDataset const &ds);

} // namespace sanode
