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

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scgrec/dataset.hpp"
#include "scgrec/model.hpp"
#include "scgrec/recommender.hpp"

namespace scgrec {

inline constexpr std::array<std::size_t, 3> kCutoffs = {5, 10, 20};

struct RankMetrics {
  double ndcg = 0.0;
  double recall = 0.0;
  double hit = 0.0;
  double precision = 0.0;
};

struct CutoffMetrics {
  std::size_t k = 0;
  double ndcg = 0.0;
  double recall = 0.0;
  double hit_ratio = 0.0;
  double precision = 0.0;
};

struct MetricsReport {
  std::vector<CutoffMetrics> cutoffs;
  std::size_t users = 0;    // users contributing to the means
  std::size_t skipped = 0;  // eval users with an empty relevant set
  const CutoffMetrics& at(std::size_t k) const;
};

// Top-K game indices by descending score with `exclude` (sorted) removed.
// Ties go to the smaller game index, i.e. the smaller game id.
std::vector<std::uint32_t> rank_for_user(std::span<const double> scores,
                                         std::span<const std::uint32_t> exclude, std::size_t k);
std::vector<std::uint32_t> rank_for_user(const Recommender& rec, std::uint32_t user,
                                         std::span<const std::uint32_t> exclude, std::size_t k);

// Binary-relevance metrics of the first K entries of `ranked`. Throws
// std::invalid_argument for an empty relevant set.
RankMetrics rank_metrics(std::span<const std::uint32_t> ranked,
                         std::span<const std::uint32_t> relevant, std::size_t k);

enum class Phase { kValidation, kTest };

struct EvalUser {
  std::uint32_t user = 0;
  std::vector<std::uint32_t> train;  // sorted game indices
  std::vector<std::uint32_t> validation;
  std::vector<std::uint32_t> test;
};

struct EvalSet {
  std::vector<EvalUser> users;

  // Game and user indices follow `train_index`.
  static EvalSet from_split(const Split& split, const EngagementIndex& train_index);
};

// Means over eval users with a non-empty relevant set. Training items are
// excluded in both phases and validation items too in the test phase.
MetricsReport evaluate(const Recommender& rec, const EvalSet& eval, Phase phase, int threads = 1);

enum class PopularityMode { kCount, kTime };

class PopularityRecommender : public Recommender {
 public:
  PopularityRecommender(const EngagementIndex& train, PopularityMode mode);
  std::vector<double> scores(std::uint32_t) const override { return scores_; }
  std::string name() const override;

 private:
  PopularityMode mode_;
  std::vector<double> scores_;
};

PopularityRecommender popularity_baseline(const EngagementIndex& train, PopularityMode mode);

enum class Variant { kFull, kA, kB, kC };

Variant parse_variant(const std::string& label);  // "full", "A", "B", "C"
std::string variant_name(Variant v);

struct ModelSetup {
  ModelOptions options;
  FusionWeights weights;
};

// A drops the social path, B the context path, C both; the removed weight
// mass moves to the personalized term.
ModelSetup ablation_setup(const ModelSetup& full, Variant variant);

using NamedReport = std::pair<std::string, MetricsReport>;

// Rows are methods, columns metric@K.
std::string metrics_csv(const std::vector<NamedReport>& reports);
std::string metrics_json(const std::vector<NamedReport>& reports);
void write_metrics(const std::vector<NamedReport>& reports, const std::filesystem::path& dir,
                   const std::string& stem = "metrics");

}  // namespace scgrec
