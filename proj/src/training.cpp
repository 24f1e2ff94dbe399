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
#include "scgrec/training.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

namespace scgrec {
namespace {

// -log(sigmoid(x)), stable for large |x|.
double neg_log_sigmoid(double x) {
  return x > 0.0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

std::size_t slot_of(const std::vector<std::uint32_t>& sorted, std::uint32_t u) {
  return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), u) -
                                  sorted.begin());
}

std::vector<std::uint32_t> sorted_unique(std::vector<std::uint32_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

template <typename M>
double add_l2(const M& param, double lambda, M* grad) {
  if (grad) *grad += 2.0 * lambda * param;
  return lambda * param.squaredNorm();
}

double add_l2_row(const Matrix& param, Eigen::Index row, double lambda, Matrix* grad) {
  if (grad) grad->row(row) += 2.0 * lambda * param.row(row);
  return lambda * param.row(row).squaredNorm();
}

// Forward pass for a batch, returning the regularized loss. When `grad` is
// given it receives the full gradient (it must already be zeroed and shaped).
double run_batch(const ModelState& s, const ForwardContext& ctx, const ModelSetup& setup,
                 std::span<const Triplet> triplets, double lambda, ModelState* grad,
                 int threads) {
  const ModelOptions& opt = setup.options;
  const FusionWeights& w = setup.weights;
  const auto d = static_cast<Eigen::Index>(s.dim());
  const double inv_c = 1.0 / static_cast<double>(kNumRelations);

  std::vector<std::uint32_t> batch_users;
  batch_users.reserve(triplets.size());
  for (const auto& t : triplets) batch_users.push_back(t.user);
  batch_users = sorted_unique(std::move(batch_users));

  // Users whose embeddings the batch reads: batch users plus friends.
  std::vector<std::uint32_t> needed = batch_users;
  if (opt.social_path) {
    for (const auto u : batch_users) {
      const auto f = ctx.friends(u);
      needed.insert(needed.end(), f.begin(), f.end());
    }
    needed = sorted_unique(std::move(needed));
  }

  // Context path: game context embeddings, then per-user context embeddings.
  GameContextCache games;
  Matrix user_ctx;  // rows follow `needed`
  Matrix ctx_agg;
  if (opt.context_path) {
    games = compute_game_context(s, ctx.graph(), opt, threads);
    const auto nn = static_cast<Eigen::Index>(needed.size());
    ctx_agg.resize(nn, d);
    Matrix personal(nn, d);
    parallel_for(needed.size(), threads, [&](std::size_t n) {
      const auto row = static_cast<Eigen::Index>(n);
      ctx_agg.row(row) = context_aggregate(ctx, games.context, needed[n]).transpose();
      personal.row(row) = s.user_personal.row(needed[n]);
    });
    user_ctx.noalias() = personal * s.ctx_fuse.leftCols(d).transpose();
    user_ctx.noalias() += ctx_agg * s.ctx_fuse.rightCols(d).transpose();
  }
  auto attention_input = [&](std::uint32_t u) -> Vector {
    if (opt.context_path) return user_ctx.row(static_cast<Eigen::Index>(slot_of(needed, u))).transpose();
    return s.user_personal.row(u).transpose();
  };

  // Social path and final embeddings per batch user.
  struct SocialState {
    Matrix friend_inputs;
    Attention att;
    Vector aggregate;
  };
  std::vector<SocialState> social(opt.social_path ? batch_users.size() : 0);
  Matrix final_emb(static_cast<Eigen::Index>(batch_users.size()), d);
  parallel_for(batch_users.size(), threads, [&](std::size_t b) {
    const std::uint32_t u = batch_users[b];
    Vector e = w.self * s.user_personal.row(u).transpose();
    if (opt.context_path) {
      e += w.context * user_ctx.row(static_cast<Eigen::Index>(slot_of(needed, u))).transpose();
    }
    if (opt.social_path) {
      auto& ss = social[b];
      const auto friends = ctx.friends(u);
      ss.aggregate = Vector::Zero(d);
      if (!friends.empty()) {
        ss.friend_inputs.resize(static_cast<Eigen::Index>(friends.size()), d);
        for (std::size_t k = 0; k < friends.size(); ++k) {
          ss.friend_inputs.row(static_cast<Eigen::Index>(k)) = attention_input(friends[k]).transpose();
        }
        ss.att = social_attention(s, opt, attention_input(u), ss.friend_inputs);
        ss.aggregate = social_aggregate(s, friends, ss.att.alpha);
      }
      e += w.social * user_social_embedding(s, u, ss.aggregate);
    }
    final_emb.row(static_cast<Eigen::Index>(b)) = e.transpose();
  });

  // BPR terms.
  double loss = 0.0;
  Matrix d_final;
  if (grad) d_final = Matrix::Zero(static_cast<Eigen::Index>(batch_users.size()), d);
  for (const auto& t : triplets) {
    const auto b = static_cast<Eigen::Index>(slot_of(batch_users, t.user));
    const auto e = final_emb.row(b);
    const double x = e.dot(s.game_personal.row(t.positive)) - e.dot(s.game_personal.row(t.negative));
    loss += neg_log_sigmoid(x);
    if (grad) {
      const double g = -1.0 / (1.0 + std::exp(x));  // d/dx of -log sigmoid(x)
      d_final.row(b) += g * (s.game_personal.row(t.positive) - s.game_personal.row(t.negative));
      grad->game_personal.row(t.positive) += g * e;
      grad->game_personal.row(t.negative) -= g * e;
    }
  }

  // L2 on touched parameters.
  {
    Matrix* gu = grad ? &grad->user_personal : nullptr;
    Matrix* gg = grad ? &grad->game_personal : nullptr;
    for (const auto u : needed) loss += add_l2_row(s.user_personal, u, lambda, gu);
    std::vector<std::uint32_t> batch_games;
    for (const auto& t : triplets) {
      batch_games.push_back(t.positive);
      batch_games.push_back(t.negative);
    }
    for (const auto g : sorted_unique(std::move(batch_games))) {
      loss += add_l2_row(s.game_personal, g, lambda, gg);
    }
    if (opt.context_path) {
      for (std::size_t c = 0; c < kNumRelations; ++c) {
        loss += add_l2(s.conv_weight[c], lambda, grad ? &grad->conv_weight[c] : nullptr);
        loss += add_l2(s.conv_bias[c], lambda, grad ? &grad->conv_bias[c] : nullptr);
      }
      loss += add_l2(s.ctx_fuse, lambda, grad ? &grad->ctx_fuse : nullptr);
    }
    if (opt.social_path) {
      loss += add_l2(s.att_proj, lambda, grad ? &grad->att_proj : nullptr);
      loss += add_l2(s.att_vec, lambda, grad ? &grad->att_vec : nullptr);
      loss += add_l2(s.soc_fuse, lambda, grad ? &grad->soc_fuse : nullptr);
    }
  }
  if (!grad) return loss;

  // Backward through fusion and the social path. Attention-input gradients
  // land in d_user_ctx (context path) or directly in personal embeddings.
  Matrix d_user_ctx;
  if (opt.context_path) d_user_ctx = Matrix::Zero(static_cast<Eigen::Index>(needed.size()), d);
  auto add_input_grad = [&](std::uint32_t u, const Vector& g) {
    if (opt.context_path) {
      d_user_ctx.row(static_cast<Eigen::Index>(slot_of(needed, u))) += g.transpose();
    } else {
      grad->user_personal.row(u) += g.transpose();
    }
  };
  const Vector a_query = s.att_vec.head(d);
  const Vector a_friend = s.att_vec.tail(d);
  const Vector query_dir = s.att_proj.transpose() * a_query;
  const Vector friend_dir = s.att_proj.transpose() * a_friend;
  const auto nb = static_cast<Eigen::Index>(batch_users.size());

  for (std::size_t b = 0; b < batch_users.size(); ++b) {
    const std::uint32_t u = batch_users[b];
    grad->user_personal.row(u) += w.self * d_final.row(static_cast<Eigen::Index>(b));
    if (opt.context_path) {
      d_user_ctx.row(static_cast<Eigen::Index>(slot_of(needed, u))) +=
          w.context * d_final.row(static_cast<Eigen::Index>(b));
    }
  }

  if (opt.social_path) {
    // e_s = S [p_u ; agg], batched over users.
    Matrix d_social = w.social * d_final;
    Matrix personal(nb, d);
    Matrix aggregate(nb, d);
    for (Eigen::Index b = 0; b < nb; ++b) {
      personal.row(b) = s.user_personal.row(batch_users[static_cast<std::size_t>(b)]);
      aggregate.row(b) = social[static_cast<std::size_t>(b)].aggregate.transpose();
    }
    grad->soc_fuse.leftCols(d).noalias() += d_social.transpose() * personal;
    grad->soc_fuse.rightCols(d).noalias() += d_social.transpose() * aggregate;
    const Matrix d_personal = d_social * s.soc_fuse.leftCols(d);
    const Matrix d_agg = d_social * s.soc_fuse.rightCols(d);

    // Attention logits are a_q.(W x_u) + a_f.(W x_f), so W and a only need
    // the dz-weighted input sums.
    Vector sum_query = Vector::Zero(d);
    Vector sum_friend = Vector::Zero(d);
    for (std::size_t b = 0; b < batch_users.size(); ++b) {
      const std::uint32_t u = batch_users[b];
      const auto row = static_cast<Eigen::Index>(b);
      grad->user_personal.row(u) += d_personal.row(row);
      const auto friends = ctx.friends(u);
      if (friends.empty()) continue;
      const auto& ss = social[b];
      const auto& alpha = ss.att.alpha;
      std::vector<double> d_alpha(friends.size());
      double weighted = 0.0;
      for (std::size_t k = 0; k < friends.size(); ++k) {
        grad->user_personal.row(friends[k]) += alpha[k] * d_agg.row(row);
        d_alpha[k] = d_agg.row(row).dot(s.user_personal.row(friends[k]));
        weighted += alpha[k] * d_alpha[k];
      }
      double dz_query = 0.0;
      for (std::size_t k = 0; k < friends.size(); ++k) {
        const double ds = alpha[k] * (d_alpha[k] - weighted);
        const double dz = ds * (ss.att.logits[k] > 0.0 ? 1.0 : opt.leaky_slope);
        if (dz == 0.0) continue;
        sum_friend += dz * ss.friend_inputs.row(static_cast<Eigen::Index>(k)).transpose();
        add_input_grad(friends[k], dz * friend_dir);
        dz_query += dz;
      }
      if (dz_query != 0.0) {
        sum_query += dz_query * attention_input(u);
        add_input_grad(u, dz_query * query_dir);
      }
    }
    grad->att_vec.head(d) += s.att_proj * sum_query;
    grad->att_vec.tail(d) += s.att_proj * sum_friend;
    grad->att_proj += a_query * sum_query.transpose() + a_friend * sum_friend.transpose();
  }

  if (!opt.context_path) return loss;

  // Backward through e_c = F [p_u ; agg_c] and the time-weighted aggregate.
  const auto nn = static_cast<Eigen::Index>(needed.size());
  Matrix personal(nn, d);
  for (Eigen::Index n = 0; n < nn; ++n) {
    personal.row(n) = s.user_personal.row(needed[static_cast<std::size_t>(n)]);
  }
  grad->ctx_fuse.leftCols(d).noalias() += d_user_ctx.transpose() * personal;
  grad->ctx_fuse.rightCols(d).noalias() += d_user_ctx.transpose() * ctx_agg;
  const Matrix d_personal = d_user_ctx * s.ctx_fuse.leftCols(d);
  const Matrix d_agg = d_user_ctx * s.ctx_fuse.rightCols(d);
  Matrix d_games = Matrix::Zero(static_cast<Eigen::Index>(ctx.num_games()), d);
  for (std::size_t n = 0; n < needed.size(); ++n) {
    const std::uint32_t u = needed[n];
    const auto row = static_cast<Eigen::Index>(n);
    grad->user_personal.row(u) += d_personal.row(row);
    const auto g = ctx.games(u);
    const auto gamma = ctx.gamma(u);
    for (std::size_t k = 0; k < g.size(); ++k) d_games.row(g[k]) += gamma[k] * d_agg.row(row);
  }

  // Backward through the per-relation convolutions.
  const ContextGraph& graph = ctx.graph();
  for (std::size_t c = 0; c < kNumRelations; ++c) {
    const RelationKind kind = kAllRelations[c];
    grad->conv_weight[c].noalias() += inv_c * (d_games.transpose() * games.neighbor_sum[c]);
    grad->conv_bias[c] += inv_c * d_games.colwise().sum().transpose();
    const Matrix d_hidden = d_games * s.conv_weight[c];  // row i: W_c^T dG_i
    // Symmetric adjacency: the games reading j are exactly j's neighbors.
    parallel_for(ctx.num_games(), threads, [&](std::size_t j) {
      const auto gj = static_cast<std::uint32_t>(j);
      for (const std::uint32_t i : graph.neighbors(gj, kind)) {
        grad->game_personal.row(static_cast<Eigen::Index>(j)) +=
            inv_c * edge_norm(graph, kind, i, gj, opt.normalization) * d_hidden.row(i);
      }
    });
  }
  return loss;
}

void prepare_grad(const ModelState& like, ModelState& grad) {
  if (grad.dim() != like.dim() || grad.num_users() != like.num_users() ||
      grad.num_games() != like.num_games()) {
    grad = ModelState::zeros(like.num_users(), like.num_games(), like.dim());
  } else {
    grad.set_zero();
  }
}

std::vector<std::span<double>> spans(ModelState& s) {
  std::vector<std::span<double>> out;
  s.visit([&out](std::string_view, std::span<double> v) { out.push_back(v); });
  return out;
}

}  // namespace

void Hyperparams::validate() const {
  if (dim < 1) throw std::invalid_argument("embedding size must be >= 1");
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning rate must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (negatives < 1) throw std::invalid_argument("negatives must be >= 1");
  const auto& w = setup.weights;
  if (std::abs(w.context + w.social + w.self - 1.0) > 1e-9) {
    throw std::invalid_argument("fusion weights must sum to 1");
  }
  for (double x : {w.context, w.social, w.self}) {
    if (x < 0.0 || x > 1.0) throw std::invalid_argument("fusion weights must lie in [0, 1]");
  }
}

TripletStream sample_triplets(const EngagementIndex& train, std::uint64_t seed,
                              std::size_t negatives) {
  TripletStream out;
  const auto ng = static_cast<std::uint32_t>(train.num_games());
  std::vector<std::pair<std::uint32_t, std::uint32_t>> positives;
  positives.reserve(train.num_engagements() * negatives);
  for (std::uint32_t u = 0; u < train.num_users(); ++u) {
    const auto games = train.games_of(u);
    if (games.empty()) continue;
    if (games.size() >= ng) {
      ++out.skipped_users;
      continue;
    }
    for (std::size_t r = 0; r < negatives; ++r) {
      for (const auto g : games) positives.emplace_back(u, g);
    }
  }
  Rng rng(seed);
  std::shuffle(positives.begin(), positives.end(), rng);
  std::uniform_int_distribution<std::uint32_t> pick(0, ng == 0 ? 0 : ng - 1);
  out.triplets.reserve(positives.size());
  for (const auto& [u, g] : positives) {
    std::uint32_t j = pick(rng);
    while (train.engaged(u, j)) j = pick(rng);
    out.triplets.push_back({u, g, j});
  }
  return out;
}

double bpr_loss(const ModelState& state, const ForwardContext& ctx, const ModelSetup& setup,
                std::span<const Triplet> triplets, double lambda, int threads) {
  return run_batch(state, ctx, setup, triplets, lambda, nullptr, threads);
}

double gradients(const ModelState& state, const ForwardContext& ctx, const ModelSetup& setup,
                 std::span<const Triplet> triplets, double lambda, ModelState& grad,
                 int threads) {
  prepare_grad(state, grad);
  return run_batch(state, ctx, setup, triplets, lambda, &grad, threads);
}

Adam::Adam(const ModelState& like, double learning_rate, double beta1, double beta2,
           double epsilon)
    : m_(ModelState::zeros(like.num_users(), like.num_games(), like.dim())),
      v_(ModelState::zeros(like.num_users(), like.num_games(), like.dim())),
      lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(epsilon) {}

void Adam::step(ModelState& params, const ModelState& grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto p = spans(params);
  auto g = spans(const_cast<ModelState&>(grad));
  auto m = spans(m_);
  auto v = spans(v_);
  for (std::size_t k = 0; k < p.size(); ++k) {
    for (std::size_t i = 0; i < p[k].size(); ++i) {
      const double gi = g[k][i];
      m[k][i] = beta1_ * m[k][i] + (1.0 - beta1_) * gi;
      v[k][i] = beta2_ * v[k][i] + (1.0 - beta2_) * gi * gi;
      p[k][i] -= lr_ * (m[k][i] / c1) / (std::sqrt(v[k][i] / c2) + eps_);
    }
  }
}

std::string EpochLog::to_json_line() const {
  nlohmann::ordered_json j;
  j["epoch"] = epoch;
  j["train_loss"] = train_loss;
  j["val_ndcg10"] = val_ndcg10;
  j["elapsed_seconds"] = elapsed_seconds;
  return j.dump();
}

TrainResult train(const EngagementIndex& train_index, const ForwardContext& ctx,
                  const EvalSet& validation, const Hyperparams& hp,
                  const std::function<void(const EpochLog&)>& on_epoch) {
  hp.validate();
  return train_from(ModelState::random(train_index.num_users(), train_index.num_games(), hp.dim,
                                       derive_seed(hp.seed, 0)),
                    train_index, ctx, validation, hp, on_epoch);
}

TrainResult train_from(ModelState init, const EngagementIndex& train_index,
                       const ForwardContext& ctx, const EvalSet& validation,
                       const Hyperparams& hp,
                       const std::function<void(const EpochLog&)>& on_epoch) {
  hp.validate();
  const auto start = std::chrono::steady_clock::now();
  const bool early_stop = std::any_of(validation.users.begin(), validation.users.end(),
                                      [](const EvalUser& u) { return !u.validation.empty(); });
  TrainResult result;
  ModelState state = std::move(init);
  Adam adam(state, hp.learning_rate);
  ModelState grad;
  double best = -std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= hp.max_epochs; ++epoch) {
    const auto stream = sample_triplets(train_index, derive_seed(hp.seed, 1000 + epoch), hp.negatives);
    const std::span<const Triplet> all(stream.triplets);
    double epoch_loss = 0.0;
    for (std::size_t begin = 0, batch = 0; begin < all.size(); begin += hp.batch_size, ++batch) {
      const auto chunk = all.subspan(begin, std::min(hp.batch_size, all.size() - begin));
      const double loss = gradients(state, ctx, hp.setup, chunk, hp.lambda, grad, hp.threads);
      if (!std::isfinite(loss)) {
        throw TrainingError(fmt::format(
            "non-finite loss {} in epoch {} batch {} (triplets {}..{})", loss, epoch, batch,
            begin, begin + chunk.size()));
      }
      epoch_loss += loss;
      adam.step(state, grad);
    }

    EpochLog log;
    log.epoch = epoch;
    log.train_loss = epoch_loss;
    if (early_stop) {
      const ScgrecRecommender rec("scgrec", state, ctx, hp.setup.options, hp.setup.weights,
                                  hp.threads);
      log.val_ndcg10 = evaluate(rec, validation, Phase::kValidation, hp.threads).at(10).ndcg;
    }
    log.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);

    if (!early_stop) {
      result.best_epoch = epoch;
      continue;
    }
    if (log.val_ndcg10 > best) {
      best = log.val_ndcg10;
      result.state = state;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= hp.patience) {
      break;
    }
  }
  if (!early_stop || result.best_epoch == 0) result.state = std::move(state);
  result.best_val_ndcg10 = early_stop ? best : 0.0;
  return result;
}

GradCheckReport gradient_check(const ModelState& state, const ForwardContext& ctx,
                               const ModelSetup& setup, std::span<const Triplet> triplets,
                               double lambda, double step, double rel_tol, double abs_tol) {
  ModelState analytic;
  gradients(state, ctx, setup, triplets, lambda, analytic);
  ModelState probe = state;
  auto params = spans(probe);
  auto grads = spans(analytic);
  std::vector<std::string> names;
  probe.visit([&names](std::string_view n, std::span<double>) { names.emplace_back(n); });

  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (std::size_t i = 0; i < params[k].size(); ++i) {
      const double saved = params[k][i];
      params[k][i] = saved + step;
      const double up = bpr_loss(probe, ctx, setup, triplets, lambda);
      params[k][i] = saved - step;
      const double down = bpr_loss(probe, ctx, setup, triplets, lambda);
      params[k][i] = saved;
      GradCheckEntry e{names[k], i, grads[k][i], (up - down) / (2.0 * step), true};
      const double diff = std::abs(e.analytic - e.numeric);
      if (std::abs(e.analytic) < 1e-6) {
        e.ok = diff < abs_tol;
      } else {
        const double rel = diff / std::max(std::abs(e.analytic), std::abs(e.numeric));
        report.max_relative_error = std::max(report.max_relative_error, rel);
        e.ok = rel < rel_tol;
      }
      if (!e.ok) ++report.failures;
      report.entries.push_back(std::move(e));
    }
  }
  return report;
}

}  // namespace scgrec
