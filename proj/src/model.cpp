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
#include "scgrec/model.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/core.h>

namespace scgrec {

ModelState ModelState::zeros(std::size_t num_users, std::size_t num_games, std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("embedding size must be >= 1");
  const auto d = static_cast<Eigen::Index>(dim);
  ModelState s;
  s.user_personal = Matrix::Zero(static_cast<Eigen::Index>(num_users), d);
  s.game_personal = Matrix::Zero(static_cast<Eigen::Index>(num_games), d);
  for (std::size_t c = 0; c < kNumRelations; ++c) {
    s.conv_weight[c] = Matrix::Zero(d, d);
    s.conv_bias[c] = Vector::Zero(d);
  }
  s.ctx_fuse = Matrix::Zero(d, 2 * d);
  s.att_proj = Matrix::Zero(d, d);
  s.att_vec = Vector::Zero(2 * d);
  s.soc_fuse = Matrix::Zero(d, 2 * d);
  return s;
}

ModelState ModelState::random(std::size_t num_users, std::size_t num_games, std::size_t dim,
                              std::uint64_t seed) {
  ModelState s = zeros(num_users, num_games, dim);
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  Rng rng(seed);
  std::uniform_real_distribution<double> uniform(-bound, bound);
  s.visit([&](std::string_view name, std::span<double> values) {
    if (name.starts_with("conv_bias")) return;
    for (double& v : values) v = uniform(rng);
  });
  return s;
}

void ModelState::set_zero() {
  visit([](std::string_view, std::span<double> values) {
    std::fill(values.begin(), values.end(), 0.0);
  });
}

bool ModelState::all_finite() const {
  bool ok = true;
  visit([&ok](std::string_view, std::span<const double> values) {
    for (double v : values) ok = ok && std::isfinite(v);
  });
  return ok;
}

FusionWeights FusionWeights::from(double context, double social) {
  FusionWeights w{context, social, 1.0 - context - social};
  auto in_unit = [](double x) { return x >= -1e-12 && x <= 1.0 + 1e-12; };
  if (!in_unit(w.context) || !in_unit(w.social) || !in_unit(w.self)) {
    throw std::invalid_argument(fmt::format(
        "fusion weights context={} social={} self={} must each lie in [0, 1]", w.context,
        w.social, w.self));
  }
  if (std::abs(w.self) < 1e-12) w.self = 0.0;
  return w;
}

PercentileIndex::PercentileIndex(const EngagementIndex& train) {
  times_.resize(train.num_games());
  for (std::uint32_t g = 0; g < train.num_games(); ++g) {
    const auto m = train.game_minutes(g);
    times_[g].assign(m.begin(), m.end());
    std::sort(times_[g].begin(), times_[g].end());
  }
}

PercentileIndex::PercentileIndex(std::vector<std::vector<double>> per_game)
    : times_(std::move(per_game)) {
  for (auto& t : times_) std::sort(t.begin(), t.end());
}

double PercentileIndex::percentile(std::uint32_t game, double t) const {
  if (game >= times_.size() || times_[game].empty()) {
    throw std::invalid_argument(fmt::format("game index {} has no training records", game));
  }
  const auto& v = times_[game];
  const auto at_most = std::upper_bound(v.begin(), v.end(), t) - v.begin();
  return static_cast<double>(at_most) / static_cast<double>(v.size());
}

std::vector<double> time_weights(std::span<const std::pair<std::uint32_t, double>> engagements,
                                 const PercentileIndex& index) {
  if (engagements.empty()) throw std::invalid_argument("time weights need >= 1 engagement");
  std::vector<double> w;
  w.reserve(engagements.size());
  for (const auto& [game, t] : engagements) w.push_back(index.percentile(game, t));
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0.0)) {
    // Only reachable for times below every record; fall back to uniform.
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(w.size()));
    return w;
  }
  for (double& x : w) x /= total;
  return w;
}

ForwardContext::ForwardContext(const EngagementIndex& train, const ContextGraph& graph)
    : graph_(&graph) {
  if (graph.num_games() != train.num_games()) {
    throw std::invalid_argument("context graph and engagement index disagree on game count");
  }
  const PercentileIndex percentiles(train);
  const std::size_t nu = train.num_users();
  games_.resize(nu);
  gamma_.resize(nu);
  friends_.resize(nu);
  std::vector<std::pair<std::uint32_t, double>> list;
  for (std::uint32_t u = 0; u < nu; ++u) {
    const auto g = train.games_of(u);
    const auto m = train.minutes_of(u);
    games_[u].assign(g.begin(), g.end());
    if (!g.empty()) {
      list.clear();
      for (std::size_t k = 0; k < g.size(); ++k) list.emplace_back(g[k], m[k]);
      gamma_[u] = time_weights(list, percentiles);
    }
    const auto f = train.friends_of(u);
    friends_[u].assign(f.begin(), f.end());
  }
}

ForwardContext::ForwardContext(
    const ContextGraph& graph, std::vector<std::vector<std::pair<std::uint32_t, double>>> user_games,
    std::vector<std::vector<std::uint32_t>> friends, const PercentileIndex& percentiles)
    : graph_(&graph), friends_(std::move(friends)) {
  const std::size_t nu = user_games.size();
  if (friends_.size() != nu) throw std::invalid_argument("friend lists must cover every user");
  games_.resize(nu);
  gamma_.resize(nu);
  for (std::size_t u = 0; u < nu; ++u) {
    for (const auto& [g, t] : user_games[u]) games_[u].push_back(g);
    if (!user_games[u].empty()) gamma_[u] = time_weights(user_games[u], percentiles);
  }
}

double edge_norm(const ContextGraph& graph, RelationKind kind, std::uint32_t i, std::uint32_t j,
                 Normalization normalization) {
  const auto ni = static_cast<double>(graph.neighbor_count(i, kind));
  if (normalization == Normalization::kMean) return 1.0 / ni;
  const auto nj = static_cast<double>(graph.neighbor_count(j, kind));
  return 1.0 / std::sqrt(ni * nj);
}

GameContextCache compute_game_context(const ModelState& state, const ContextGraph& graph,
                                      const ModelOptions& options, int threads) {
  const auto ng = static_cast<Eigen::Index>(graph.num_games());
  const auto d = static_cast<Eigen::Index>(state.dim());
  GameContextCache cache;
  cache.context = Matrix::Zero(ng, d);
  const double inv_c = 1.0 / static_cast<double>(kNumRelations);
  for (std::size_t c = 0; c < kNumRelations; ++c) {
    const RelationKind kind = kAllRelations[c];
    Matrix& sum = cache.neighbor_sum[c];
    sum = Matrix::Zero(ng, d);
    parallel_for(static_cast<std::size_t>(ng), threads, [&](std::size_t i) {
      const auto gi = static_cast<std::uint32_t>(i);
      for (const std::uint32_t j : graph.neighbors(gi, kind)) {
        sum.row(static_cast<Eigen::Index>(i)) +=
            edge_norm(graph, kind, gi, j, options.normalization) * state.game_personal.row(j);
      }
    });
    cache.context.noalias() += sum * state.conv_weight[c].transpose();
    cache.context.rowwise() += state.conv_bias[c].transpose();
  }
  cache.context *= inv_c;
  return cache;
}

Vector game_context_embedding(const ModelState& state, const ContextGraph& graph,
                              const ModelOptions& options, std::uint32_t game) {
  const auto d = static_cast<Eigen::Index>(state.dim());
  Vector out = Vector::Zero(d);
  for (std::size_t c = 0; c < kNumRelations; ++c) {
    const RelationKind kind = kAllRelations[c];
    Vector sum = Vector::Zero(d);
    for (const std::uint32_t j : graph.neighbors(game, kind)) {
      sum += edge_norm(graph, kind, game, j, options.normalization) *
             state.game_personal.row(j).transpose();
    }
    out += state.conv_weight[c] * sum + state.conv_bias[c];
  }
  return out / static_cast<double>(kNumRelations);
}

Vector context_aggregate(const ForwardContext& ctx, const Matrix& game_context, std::uint32_t u) {
  Vector agg = Vector::Zero(game_context.cols());
  const auto games = ctx.games(u);
  const auto gamma = ctx.gamma(u);
  for (std::size_t k = 0; k < games.size(); ++k) {
    agg += gamma[k] * game_context.row(games[k]).transpose();
  }
  return agg;
}

Vector user_context_embedding(const ModelState& state, const ForwardContext& ctx,
                              const Matrix& game_context, std::uint32_t u) {
  const auto d = static_cast<Eigen::Index>(state.dim());
  const Vector agg = context_aggregate(ctx, game_context, u);
  return state.ctx_fuse.leftCols(d) * state.user_personal.row(u).transpose() +
         state.ctx_fuse.rightCols(d) * agg;
}

double leaky_relu(double x, double slope) { return x > 0.0 ? x : slope * x; }

Attention social_attention(const ModelState& state, const ModelOptions& options,
                           const Vector& query_input, const Matrix& friend_inputs) {
  const auto d = static_cast<Eigen::Index>(state.dim());
  Attention att;
  const auto n = static_cast<std::size_t>(friend_inputs.rows());
  if (n == 0) return att;
  // a^T (W x ⊕ W y) = (W^T a_q)·x + (W^T a_f)·y
  const Vector query_dir = state.att_proj.transpose() * state.att_vec.head(d);
  const Vector friend_dir = state.att_proj.transpose() * state.att_vec.tail(d);
  const double base = query_input.dot(query_dir);
  att.logits.resize(n);
  att.alpha.resize(n);
  double max_s = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    att.logits[k] = base + friend_inputs.row(static_cast<Eigen::Index>(k)).dot(friend_dir);
    att.alpha[k] = leaky_relu(att.logits[k], options.leaky_slope);
    max_s = std::max(max_s, att.alpha[k]);
  }
  double total = 0.0;
  for (double& a : att.alpha) {
    a = std::exp(a - max_s);
    total += a;
  }
  for (double& a : att.alpha) a /= total;
  return att;
}

Vector social_aggregate(const ModelState& state, std::span<const std::uint32_t> friends,
                        std::span<const double> alpha) {
  Vector agg = Vector::Zero(static_cast<Eigen::Index>(state.dim()));
  for (std::size_t k = 0; k < friends.size(); ++k) {
    agg += alpha[k] * state.user_personal.row(friends[k]).transpose();
  }
  return agg;
}

Vector user_social_embedding(const ModelState& state, std::uint32_t u, const Vector& aggregate) {
  const auto d = static_cast<Eigen::Index>(state.dim());
  return state.soc_fuse.leftCols(d) * state.user_personal.row(u).transpose() +
         state.soc_fuse.rightCols(d) * aggregate;
}

Vector final_user_embedding(const FusionWeights& weights, const Vector& context,
                            const Vector& social, const Vector& personal) {
  return weights.context * context + weights.social * social + weights.self * personal;
}

double score(const ModelState& state, const Vector& user_embedding, std::uint32_t game) {
  return user_embedding.dot(state.game_personal.row(game));
}

namespace {

// Final embedding of u given attention inputs for all users (or only the
// rows u and its friends need).
Vector embed_user(const ModelState& state, const ForwardContext& ctx, const ModelOptions& options,
                  const FusionWeights& weights, const Matrix& user_context,
                  const Matrix& attention_inputs, std::uint32_t u) {
  const auto d = static_cast<Eigen::Index>(state.dim());
  const Vector personal = state.user_personal.row(u).transpose();
  Vector out = weights.self * personal;
  if (options.context_path) out += weights.context * user_context.row(u).transpose();
  if (options.social_path) {
    const auto friends = ctx.friends(u);
    Vector agg = Vector::Zero(d);
    if (!friends.empty()) {
      Matrix friend_inputs(static_cast<Eigen::Index>(friends.size()), d);
      for (std::size_t k = 0; k < friends.size(); ++k) {
        friend_inputs.row(static_cast<Eigen::Index>(k)) = attention_inputs.row(friends[k]);
      }
      const auto att =
          social_attention(state, options, attention_inputs.row(u).transpose(), friend_inputs);
      agg = social_aggregate(state, friends, att.alpha);
    }
    out += weights.social * user_social_embedding(state, u, agg);
  }
  return out;
}

}  // namespace

Matrix compute_user_embeddings(const ModelState& state, const ForwardContext& ctx,
                               const ModelOptions& options, const FusionWeights& weights,
                               int threads) {
  const auto nu = static_cast<Eigen::Index>(ctx.num_users());
  const auto d = static_cast<Eigen::Index>(state.dim());
  Matrix user_context;
  if (options.context_path) {
    const auto games = compute_game_context(state, ctx.graph(), options, threads);
    user_context.resize(nu, d);
    parallel_for(static_cast<std::size_t>(nu), threads, [&](std::size_t u) {
      user_context.row(static_cast<Eigen::Index>(u)) =
          user_context_embedding(state, ctx, games.context, static_cast<std::uint32_t>(u))
              .transpose();
    });
  }
  const Matrix& attention_inputs = options.context_path ? user_context : state.user_personal;
  Matrix out(nu, d);
  parallel_for(static_cast<std::size_t>(nu), threads, [&](std::size_t u) {
    out.row(static_cast<Eigen::Index>(u)) =
        embed_user(state, ctx, options, weights, user_context, attention_inputs,
                   static_cast<std::uint32_t>(u))
            .transpose();
  });
  return out;
}

std::vector<double> score_all(const ModelState& state, const ForwardContext& ctx,
                              const ModelOptions& options, const FusionWeights& weights,
                              std::uint32_t u) {
  const auto nu = static_cast<Eigen::Index>(ctx.num_users());
  const auto d = static_cast<Eigen::Index>(state.dim());
  Matrix user_context;
  if (options.context_path) {
    const auto games = compute_game_context(state, ctx.graph(), options);
    user_context = Matrix::Zero(nu, d);
    user_context.row(u) = user_context_embedding(state, ctx, games.context, u).transpose();
    if (options.social_path) {
      for (const std::uint32_t f : ctx.friends(u)) {
        user_context.row(f) = user_context_embedding(state, ctx, games.context, f).transpose();
      }
    }
  }
  const Matrix& attention_inputs = options.context_path ? user_context : state.user_personal;
  const Vector e = embed_user(state, ctx, options, weights, user_context, attention_inputs, u);
  std::vector<double> out(ctx.num_games());
  for (std::uint32_t i = 0; i < out.size(); ++i) out[i] = score(state, e, i);
  return out;
}

ScgrecRecommender::ScgrecRecommender(std::string name, const ModelState& state,
                                     const ForwardContext& ctx, const ModelOptions& options,
                                     const FusionWeights& weights, int threads)
    : name_(std::move(name)),
      user_embeddings_(compute_user_embeddings(state, ctx, options, weights, threads)),
      game_personal_(state.game_personal) {}

std::vector<double> ScgrecRecommender::scores(std::uint32_t user) const {
  std::vector<double> out(static_cast<std::size_t>(game_personal_.rows()));
  const auto e = user_embeddings_.row(user);
  for (Eigen::Index i = 0; i < game_personal_.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = e.dot(game_personal_.row(i));
  }
  return out;
}

}  // namespace scgrec
