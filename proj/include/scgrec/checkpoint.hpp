// Copyright 2026 The SCGRec Authors.
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

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "scgrec/common.hpp"
#include "scgrec/model.hpp"

namespace scgrec {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  ModelState state;
  std::vector<UserId> user_ids;  // row order of user_personal
  std::vector<GameId> game_ids;  // row order of game_personal
  nlohmann::ordered_json hyperparams = nlohmann::ordered_json::object();
};

// Layout: one line of JSON header (dimensions, relation order, tensor order
// and shapes, hyperparameters, format version), then every tensor as raw
// little-endian float64 in header order.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace scgrec
