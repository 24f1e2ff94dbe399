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
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "scgrec/common.hpp"
#include "scgrec/context_graph.hpp"
#include "scgrec/dataset.hpp"
#include "scgrec/recommender.hpp"

namespace scgrec {

// All trainable parameters. Gradients and optimizer moments use the same type.
struct ModelState {
  Matrix user_personal;                          // |U| x d
  Matrix game_personal;                          // |I| x d, also the convolution input
  std::array<Matrix, kNumRelations> conv_weight; // d x d per relation
  std::array<Vector, kNumRelations> conv_bias;   // d per relation
  Matrix ctx_fuse;                               // d x 2d, [personal | time-weighted context]
  Matrix att_proj;                               // d x d
  Vector att_vec;                                // 2d, [query half | friend half]
  Matrix soc_fuse;                               // d x 2d, [personal | friend aggregate]

  static ModelState zeros(std::size_t num_users, std::size_t num_games, std::size_t dim);
  // Uniform on [-1/sqrt(d), 1/sqrt(d)] for embeddings and matrices, zero biases.
  static ModelState random(std::size_t num_users, std::size_t num_games, std::size_t dim,
                           std::uint64_t seed);

  std::size_t dim() const { return static_cast<std::size_t>(game_personal.cols()); }
  std::size_t num_users() const { return static_cast<std::size_t>(user_personal.rows()); }
  std::size_t num_games() const { return static_cast<std::size_t>(game_personal.rows()); }

  // Visits every tensor as a flat span in a fixed order.
  template <typename Fn>
  void visit(Fn&& fn) {
    fn(std::string_view("user_personal"), span_of(user_personal));
    fn(std::string_view("game_personal"), span_of(game_personal));
    for (std::size_t c = 0; c < kNumRelations; ++c) {
      fn(kConvWeightNames[c], span_of(conv_weight[c]));
      fn(kConvBiasNames[c], span_of(conv_bias[c]));
    }
    fn(std::string_view("ctx_fuse"), span_of(ctx_fuse));
    fn(std::string_view("att_proj"), span_of(att_proj));
    fn(std::string_view("att_vec"), span_of(att_vec));
    fn(std::string_view("soc_fuse"), span_of(soc_fuse));
  }
  template <typename Fn>
  void visit(Fn&& fn) const {
    const_cast<ModelState*>(this)->visit(
        [&fn](std::string_view name, std::span<double> s) {
          fn(name, std::span<const double>(s.data(), s.size()));
        });
  }

  void set_zero();
  bool all_finite() const;

  static constexpr std::array<std::string_view, kNumRelations> kConvWeightNames = {
      "conv_weight.co_genre", "conv_weight.co_developer", "conv_weight.co_publisher",
      "conv_weight.co_purchase", "conv_weight.co_dwelling"};
  static constexpr std::array<std::string_view, kNumRelations> kConvBiasNames = {
      "conv_bias.co_genre", "conv_bias.co_developer", "conv_bias.co_publisher",
      "conv_bias.co_purchase", "conv_bias.co_dwelling"};

 private:
  template <typename M>
  static std::span<double> span_of(M& m) {
    return {m.data(), static_cast<std::size_t>(m.size())};
  }
};

struct FusionWeights {
  double context = 0.5;
  double social = 0.1;
  double self = 0.4;

  // self = 1 - context - social; throws unless all three lie in [0, 1].
  static FusionWeights from(double context, double social);
};

enum class Normalization {
  kMean,       // 1 / |N(i)|
  kSymmetric,  // 1 / sqrt(|N(i)| |N(j)|)
};

struct ModelOptions {
  Normalization normalization = Normalization::kMean;
  double leaky_slope = 0.2;
  // Disabling a path removes it from the forward pass entirely. Without the
  // context path, attention is computed over personalized embeddings instead.
  bool context_path = true;
  bool social_path = true;
};

// Sorted training dwelling times per game; percentile uses the "<=" empirical CDF.
class PercentileIndex {
 public:
  explicit PercentileIndex(const EngagementIndex& train);
  explicit PercentileIndex(std::vector<std::vector<double>> per_game);

  double percentile(std::uint32_t game, double t) const;
  std::size_t size(std::uint32_t game) const { return times_[game].size(); }

 private:
  std::vector<std::vector<double>> times_;
};

// Percentile weights normalized to sum to one. Throws on an empty list.
std::vector<double> time_weights(std::span<const std::pair<std::uint32_t, double>> engagements,
                                 const PercentileIndex& index);

// Read-only graph inputs of the forward pass, all in dense indices.
class ForwardContext {
 public:
  ForwardContext(const EngagementIndex& train, const ContextGraph& graph);
  // Explicit construction, mainly for tests: per-user engagement lists and
  // friend lists over dense indices.
  ForwardContext(const ContextGraph& graph,
                 std::vector<std::vector<std::pair<std::uint32_t, double>>> user_games,
                 std::vector<std::vector<std::uint32_t>> friends,
                 const PercentileIndex& percentiles);

  std::size_t num_users() const { return games_.size(); }
  std::size_t num_games() const { return graph_->num_games(); }
  const ContextGraph& graph() const { return *graph_; }

  std::span<const std::uint32_t> games(std::uint32_t u) const { return games_[u]; }
  std::span<const double> gamma(std::uint32_t u) const { return gamma_[u]; }
  std::span<const std::uint32_t> friends(std::uint32_t u) const { return friends_[u]; }

 private:
  const ContextGraph* graph_;
  std::vector<std::vector<std::uint32_t>> games_;
  std::vector<std::vector<double>> gamma_;
  std::vector<std::vector<std::uint32_t>> friends_;
};

// Context embeddings of every game plus the per-relation normalized neighbor
// sums that produced them (kept for backpropagation).
struct GameContextCache {
  Matrix context;                                // |I| x d
  std::array<Matrix, kNumRelations> neighbor_sum;  // |I| x d
};

double edge_norm(const ContextGraph& graph, RelationKind kind, std::uint32_t i, std::uint32_t j,
                 Normalization normalization);

GameContextCache compute_game_context(const ModelState& state, const ContextGraph& graph,
                                      const ModelOptions& options, int threads = 1);

Vector game_context_embedding(const ModelState& state, const ContextGraph& graph,
                              const ModelOptions& options, std::uint32_t game);

// gamma-weighted sum of game context embeddings; zero for users without games.
Vector context_aggregate(const ForwardContext& ctx, const Matrix& game_context, std::uint32_t u);

Vector user_context_embedding(const ModelState& state, const ForwardContext& ctx,
                              const Matrix& game_context, std::uint32_t u);

double leaky_relu(double x, double slope);

struct Attention {
  std::vector<double> logits;  // pre-activation a^T (W q ⊕ W f)
  std::vector<double> alpha;
};

// Attention inputs are context embeddings, or personalized embeddings when
// the context path is disabled. `friend_inputs` has one row per friend.
Attention social_attention(const ModelState& state, const ModelOptions& options,
                           const Vector& query_input, const Matrix& friend_inputs);

Vector social_aggregate(const ModelState& state, std::span<const std::uint32_t> friends,
                        std::span<const double> alpha);

Vector user_social_embedding(const ModelState& state, std::uint32_t u, const Vector& aggregate);

Vector final_user_embedding(const FusionWeights& weights, const Vector& context,
                            const Vector& social, const Vector& personal);

double score(const ModelState& state, const Vector& user_embedding, std::uint32_t game);

// Final embeddings for every user (rows), honoring the enabled paths.
Matrix compute_user_embeddings(const ModelState& state, const ForwardContext& ctx,
                               const ModelOptions& options, const FusionWeights& weights,
                               int threads = 1);

std::vector<double> score_all(const ModelState& state, const ForwardContext& ctx,
                              const ModelOptions& options, const FusionWeights& weights,
                              std::uint32_t u);

// Frozen trained model behind the Recommender interface. Final user
// embeddings are computed once at construction.
class ScgrecRecommender : public Recommender {
 public:
  ScgrecRecommender(std::string name, const ModelState& state, const ForwardContext& ctx,
                    const ModelOptions& options, const FusionWeights& weights, int threads = 1);

  std::vector<double> scores(std::uint32_t user) const override;
  std::string name() const override { return name_; }
  const Matrix& user_embeddings() const { return user_embeddings_; }

 private:
  std::string name_;
  Matrix user_embeddings_;
  Matrix game_personal_;
};

}  // namespace scgrec
