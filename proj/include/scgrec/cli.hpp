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
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scgrec/analysis.hpp"
#include "scgrec/evaluation.hpp"
#include "scgrec/pipeline.hpp"
#include "scgrec/synthetic.hpp"
#include "scgrec/training.hpp"

namespace scgrec {

// Invalid configuration; the CLI maps it to exit status 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Resolved settings of one invocation. Keys in the JSON file are flat and
// named as in `to_json()`.
struct RunConfig {
  std::filesystem::path data = "data";  // directory with the three TSV files
  std::filesystem::path engagements;    // overrides data/engagements.tsv
  std::filesystem::path social;
  std::filesystem::path catalog;
  std::filesystem::path out = "out";
  PrepareConfig prepare;
  Hyperparams hp;
  Variant variant = Variant::kFull;
  SynthConfig synth;
  AnalysisOptions analysis;
  std::vector<double> sweep_social = {0.0, 0.1, 0.2, 0.3};
  std::vector<double> sweep_context = {0.3, 0.5, 0.7};
  std::uint64_t seed = 1;
  int threads = 1;

  std::filesystem::path engagements_path() const;
  std::filesystem::path social_path() const;
  std::filesystem::path catalog_path() const;
  nlohmann::ordered_json to_json() const;
};

// Applies `config` (a JSON object) and then "key=value" overrides on top of
// the defaults. Unknown keys and invalid values raise ConfigError naming the
// key.
RunConfig resolve_config(const nlohmann::json& config, const std::vector<std::string>& overrides);

// FNV-1a 64 of a file's bytes, as 16 hex digits.
std::string file_checksum(const std::filesystem::path& path);

// Entry point of the command-line tool; returns the process exit status.
int run_cli(int argc, char** argv);

}  // namespace scgrec
