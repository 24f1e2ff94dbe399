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

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "scgrec/context_graph.hpp"
#include "scgrec/dataset.hpp"
#include "scgrec/evaluation.hpp"
#include "scgrec/model.hpp"
#include "scgrec/training.hpp"

namespace scgrec {

// Preprocessing and split settings. Training settings live in Hyperparams.
struct PrepareConfig {
  std::size_t min_games = 5;
  double min_total_minutes = 60.0;
  double sample_fraction = 1.0;
  std::size_t eval_users = 1000;
  double holdout_fraction = 0.1;
  GraphThresholds thresholds;
  std::uint64_t seed = 1;
  int threads = 1;

  void validate() const;
};

// Everything the model and the evaluators read. Held behind a pointer since
// the forward context refers to the graph.
struct Prepared {
  Dataset data;  // after filtering and sampling
  Split split;
  std::unique_ptr<EngagementIndex> train_index;
  std::unique_ptr<ContextGraph> graph;
  double dwelling_T = 1.0;
  std::unique_ptr<ForwardContext> ctx;
  EvalSet eval;
};

std::unique_ptr<Prepared> prepare(const Dataset& raw, const PrepareConfig& config);

struct VariantRun {
  std::string name;
  TrainResult result;
  MetricsReport validation;
  MetricsReport test;
};

// Trains one variant from scratch with hp.seed and evaluates the best state.
VariantRun run_variant(const Prepared& p, const Hyperparams& hp, Variant variant,
                       const std::function<void(const EpochLog&)>& on_epoch = {});

// Test-phase reports of both popularity baselines.
std::vector<NamedReport> baseline_reports(const Prepared& p, int threads = 1);

}  // namespace scgrec
