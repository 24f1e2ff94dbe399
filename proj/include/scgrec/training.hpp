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
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scgrec/dataset.hpp"
#include "scgrec/evaluation.hpp"
#include "scgrec/model.hpp"

namespace scgrec {

// Defaults are the best setting reported for the Steam data.
struct Hyperparams {
  std::size_t dim = 32;
  double learning_rate = 0.03;
  std::size_t batch_size = 1024;
  double lambda = 1e-4;
  ModelSetup setup{ModelOptions{}, FusionWeights{0.5, 0.1, 0.4}};
  std::size_t patience = 10;
  std::size_t max_epochs = 100;
  std::size_t negatives = 1;  // per positive per epoch
  std::uint64_t seed = 1;
  int threads = 1;

  void validate() const;
};

struct Triplet {
  std::uint32_t user = 0;
  std::uint32_t positive = 0;
  std::uint32_t negative = 0;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

struct TripletStream {
  std::vector<Triplet> triplets;
  std::size_t skipped_users = 0;  // engaged with every game
};

// One epoch of triplets: every training interaction once per negative, in
// shuffled order, with negatives drawn uniformly by rejection.
TripletStream sample_triplets(const EngagementIndex& train, std::uint64_t seed,
                              std::size_t negatives = 1);

// Summed BPR loss over the triplets plus lambda times the squared norm of the
// parameters the batch touches: its users, their friends when the social
// path is on, its positive and negative games, and every shared tensor of an
// enabled path.
double bpr_loss(const ModelState& state, const ForwardContext& ctx, const ModelSetup& setup,
                std::span<const Triplet> triplets, double lambda, int threads = 1);

// Same loss, also writing its exact gradient into `grad` (resized and zeroed).
double gradients(const ModelState& state, const ForwardContext& ctx, const ModelSetup& setup,
                 std::span<const Triplet> triplets, double lambda, ModelState& grad,
                 int threads = 1);

class Adam {
 public:
  Adam(const ModelState& like, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
       double epsilon = 1e-8);
  void step(ModelState& params, const ModelState& grad);
  std::size_t steps() const { return t_; }

 private:
  ModelState m_;
  ModelState v_;
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_ndcg10 = 0.0;
  double elapsed_seconds = 0.0;

  std::string to_json_line() const;
};

struct TrainResult {
  ModelState state;  // best validation checkpoint
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  double best_val_ndcg10 = 0.0;
};

// Mini-batch Adam on BPR with early stopping on validation NDCG@10. Without
// validation users, runs max_epochs and returns the final state.
TrainResult train(const EngagementIndex& train_index, const ForwardContext& ctx,
                  const EvalSet& validation, const Hyperparams& hp,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

// Training starting from a given state (lr = 0 leaves it untouched).
TrainResult train_from(ModelState init, const EngagementIndex& train_index,
                       const ForwardContext& ctx, const EvalSet& validation,
                       const Hyperparams& hp,
                       const std::function<void(const EpochLog&)>& on_epoch = {});

struct GradCheckEntry {
  std::string tensor;
  std::size_t offset = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  bool ok = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_relative_error = 0.0;
  std::size_t failures = 0;
  bool passed() const { return failures == 0; }
};

// Central differences over every parameter entry.
GradCheckReport gradient_check(const ModelState& state, const ForwardContext& ctx,
                               const ModelSetup& setup, std::span<const Triplet> triplets,
                               double lambda, double step = 1e-4, double rel_tol = 1e-4,
                               double abs_tol = 1e-8);

}  // namespace scgrec
