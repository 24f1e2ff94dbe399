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

#include <cstdint>
#include <string>
#include <vector>

namespace scgrec {

// Scores every catalog game (dense game index order) for a dense user index.
// Implementations must be deterministic and safe to call concurrently.
class Recommender {
 public:
  virtual ~Recommender() = default;
  virtual std::vector<double> scores(std::uint32_t user) const = 0;
  virtual std::string name() const = 0;
};

}  // namespace scgrec
