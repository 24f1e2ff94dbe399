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
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "scgrec/common.hpp"
#include "scgrec/dataset.hpp"

namespace scgrec {

enum class RelationKind : int { kCoGenre = 0, kCoDeveloper, kCoPublisher, kCoPurchase, kCoDwelling };

inline constexpr std::size_t kNumRelations = 5;
inline constexpr std::array<RelationKind, kNumRelations> kAllRelations = {
    RelationKind::kCoGenre, RelationKind::kCoDeveloper, RelationKind::kCoPublisher,
    RelationKind::kCoPurchase, RelationKind::kCoDwelling};

std::string_view relation_name(RelationKind kind);  // "co_genre", ...
bool is_feature_relation(RelationKind kind);

// Undirected edge between two games, a < b.
struct ScoredEdge {
  GameId a = 0;
  GameId b = 0;
  double score = 1.0;

  friend bool operator==(const ScoredEdge&, const ScoredEdge&) = default;
};

// Sorted by (a, b), no duplicates, no self loops.
using EdgeSet = std::vector<ScoredEdge>;

EdgeSet build_feature_relation(const std::vector<GameRecord>& catalog, RelationKind kind);

// Shared-user statistics for every game pair with at least one common user.
struct PairStats {
  std::uint32_t a = 0;  // game index, a < b
  std::uint32_t b = 0;
  std::uint32_t shared = 0;
  double mean_a = 0.0;  // mean minutes on a among the shared users
  double mean_b = 0.0;
};

// Enumerated from per-user engagement lists; never scans all pairs against all users.
std::vector<PairStats> co_engagement_pairs(const EngagementIndex& index, int threads = 1);

EdgeSet build_co_purchase(const EngagementIndex& index, double tau_p, int threads = 1);

struct CoDwellingResult {
  EdgeSet edges;
  double T = 1.0;  // normalizer actually used
};

// When T is unset it defaults to the mean |t_i - t_j| over candidate pairs.
CoDwellingResult build_co_dwelling(const EngagementIndex& index, double tau_t,
                                   std::optional<double> T, int threads = 1);

double default_dwelling_normalizer(std::span<const PairStats> pairs);

// Per-relation symmetric CSR adjacency over dense game indices.
class ContextGraph {
 public:
  // `relations` must contain each kind exactly once. Edges may be listed in
  // either orientation and repeated; they are stored once.
  static ContextGraph assemble(const std::vector<GameId>& games,
                               std::vector<std::pair<RelationKind, EdgeSet>> relations);

  std::size_t num_games() const { return games_.size(); }
  const std::vector<GameId>& games() const { return games_; }

  std::span<const std::uint32_t> neighbors(std::uint32_t game, RelationKind kind) const;
  std::span<const double> scores(std::uint32_t game, RelationKind kind) const;
  std::size_t neighbor_count(std::uint32_t game, RelationKind kind) const;
  std::size_t num_edges(RelationKind kind) const;  // undirected count

  EdgeSet edges(RelationKind kind) const;

 private:
  struct Csr {
    std::vector<std::size_t> offsets;
    std::vector<std::uint32_t> targets;
    std::vector<double> scores;
  };
  std::vector<GameId> games_;
  std::array<Csr, kNumRelations> rel_;
};

struct GraphThresholds {
  double tau_p = 0.01;
  double tau_t = 0.5;
  std::optional<double> T;
};

struct GraphBuild {
  ContextGraph graph;
  double T = 1.0;
};

// Builds all five relations; behavior relations come from `train` only.
GraphBuild build_context_graph(const Dataset& train, const EngagementIndex& index,
                               const GraphThresholds& thresholds, int threads = 1);

// One `<relation>.tsv` per relation plus graph_manifest.json.
void write_context_graph(const ContextGraph& graph, const GraphThresholds& thresholds, double T,
                         const std::filesystem::path& dir);
ContextGraph read_context_graph(const std::vector<GameId>& games,
                                const std::filesystem::path& dir);

}  // namespace scgrec
