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
#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "scgrec/evaluation.hpp"
#include "scgrec/training.hpp"
#include "support.hpp"

namespace scgrec {
namespace {

using testing::random_state;
using testing::toy_instance;

ModelSetup full_setup() { return {ModelOptions{}, FusionWeights{0.5, 0.1, 0.4}}; }

std::vector<Triplet> toy_triplets(const EngagementIndex& index, std::uint64_t seed) {
  return sample_triplets(index, seed).triplets;
}

// Central differences written out here rather than through gradient_check.
void expect_matches_finite_differences(const ModelState& state, const ForwardContext& ctx,
                                       const ModelSetup& setup,
                                       const std::vector<Triplet>& triplets, double lambda) {
  ModelState grad;
  gradients(state, ctx, setup, triplets, lambda, grad);
  ModelState probe = state;
  std::vector<std::pair<std::string, std::span<double>>> p, g;
  probe.visit([&p](std::string_view n, std::span<double> v) { p.emplace_back(n, v); });
  grad.visit([&g](std::string_view n, std::span<double> v) { g.emplace_back(n, v); });
  const double h = 1e-4;
  std::size_t checked = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    for (std::size_t i = 0; i < p[k].second.size(); ++i) {
      double& x = p[k].second[i];
      const double saved = x;
      x = saved + h;
      const double up = bpr_loss(probe, ctx, setup, triplets, lambda);
      x = saved - h;
      const double down = bpr_loss(probe, ctx, setup, triplets, lambda);
      x = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = g[k].second[i];
      if (std::abs(analytic) < 1e-6) {
        EXPECT_LT(std::abs(analytic - numeric), 1e-8) << p[k].first << "[" << i << "]";
      } else {
        const double rel =
            std::abs(analytic - numeric) / std::max(std::abs(analytic), std::abs(numeric));
        EXPECT_LT(rel, 1e-4) << p[k].first << "[" << i << "] analytic " << analytic
                             << " numeric " << numeric;
      }
      ++checked;
    }
  }
  EXPECT_GT(checked, 0u);
}

TEST(Gradients, FullModelMatchesFiniteDifferences) {
  auto t = toy_instance();
  const auto state = random_state(5, 8, 4, 3);
  expect_matches_finite_differences(state, *t->ctx, full_setup(), toy_triplets(*t->index, 5),
                                    1e-2);
}

TEST(Gradients, SymmetricNormalizationMatches) {
  auto t = toy_instance();
  auto setup = full_setup();
  setup.options.normalization = Normalization::kSymmetric;
  expect_matches_finite_differences(random_state(5, 8, 4, 8), *t->ctx, setup,
                                    toy_triplets(*t->index, 6), 1e-3);
}

TEST(Gradients, EveryVariantMatches) {
  auto t = toy_instance();
  for (auto v : {Variant::kA, Variant::kB, Variant::kC}) {
    SCOPED_TRACE(variant_name(v));
    expect_matches_finite_differences(random_state(5, 8, 4, 11), *t->ctx,
                                      ablation_setup(full_setup(), v), toy_triplets(*t->index, 7),
                                      1e-2);
  }
}

TEST(Gradients, LibraryCheckAgrees) {
  auto t = toy_instance();
  const auto report = gradient_check(random_state(5, 8, 4, 21), *t->ctx, full_setup(),
                                     toy_triplets(*t->index, 9), 1e-2);
  EXPECT_TRUE(report.passed()) << report.failures << " failures, max rel "
                               << report.max_relative_error;
  EXPECT_EQ(report.entries.size(), 5u * 4 + 8u * 4 + 5 * (16 + 4) + 32 + 16 + 8 + 32);
}

TEST(Gradients, UnreachedParametersGetZero) {
  auto t = toy_instance();
  // Variant A: attention and social fusion are off the path and unregularized.
  const auto setup = ablation_setup(full_setup(), Variant::kA);
  ModelState grad;
  std::vector<Triplet> one = {{0, 0, 7}};
  gradients(random_state(5, 8, 4, 2), *t->ctx, setup, one, 1e-2, grad);
  EXPECT_EQ(grad.att_proj.squaredNorm(), 0.0);
  EXPECT_EQ(grad.att_vec.squaredNorm(), 0.0);
  EXPECT_EQ(grad.soc_fuse.squaredNorm(), 0.0);
  // Users 2..5 are neither in the batch nor read through the social path.
  for (int u = 1; u < 5; ++u) EXPECT_EQ(grad.user_personal.row(u).squaredNorm(), 0.0);
}

TEST(Gradients, SymmetricUsersGetIdenticalGradients) {
  auto t = toy_instance();
  std::vector<std::vector<std::pair<std::uint32_t, double>>> games = {
      {{0, 50.0}, {1, 80.0}}, {{0, 50.0}, {1, 80.0}}, {{2, 10.0}}};
  std::vector<std::vector<std::uint32_t>> friends = {{2}, {2}, {0, 1}};
  const PercentileIndex pct(std::vector<std::vector<double>>{
      {50, 50}, {80, 80}, {10}, {1}, {1}, {1}, {1}, {1}});
  const ForwardContext ctx(*t->graph, games, friends, pct);
  ModelState s = random_state(3, 8, 4, 5);
  s.user_personal.row(1) = s.user_personal.row(0);
  std::vector<Triplet> trip = {{0, 0, 4}, {1, 0, 4}};
  ModelState grad;
  gradients(s, ctx, full_setup(), trip, 1e-3, grad);
  EXPECT_LT((grad.user_personal.row(0) - grad.user_personal.row(1)).norm(), 1e-14);
}

TEST(BprLoss, EqualScoresGiveLn2) {
  auto t = toy_instance();
  const auto setup = ablation_setup(full_setup(), Variant::kC);
  ModelState s = random_state(5, 8, 4, 1);
  s.game_personal.row(3) = s.game_personal.row(6);
  std::vector<Triplet> one = {{0, 3, 6}};
  EXPECT_NEAR(bpr_loss(s, *t->ctx, setup, one, 0.0), std::log(2.0), 1e-15);
}

TEST(BprLoss, SaturatesForLargeMargin) {
  auto t = toy_instance();
  const auto setup = ablation_setup(full_setup(), Variant::kC);
  ModelState s = ModelState::zeros(5, 8, 1);
  s.user_personal(0, 0) = 1.0;
  s.game_personal(3, 0) = 20.0;
  std::vector<Triplet> one = {{0, 3, 6}};
  EXPECT_LT(bpr_loss(s, *t->ctx, setup, one, 0.0), 1e-8);
}

TEST(BprLoss, RegularizerOfSingleEntry) {
  auto t = toy_instance();
  ModelState s = ModelState::zeros(5, 8, 3);
  s.user_personal(0, 1) = 2.0;
  std::vector<Triplet> one = {{0, 3, 6}};
  // All scores are zero, so the data term is ln 2.
  EXPECT_NEAR(bpr_loss(s, *t->ctx, full_setup(), one, 1.0), std::log(2.0) + 4.0, 1e-12);
}

TEST(BprLoss, StrictlyDecreasingInMargin) {
  auto t = toy_instance();
  const auto setup = ablation_setup(full_setup(), Variant::kC);
  ModelState s = ModelState::zeros(5, 8, 1);
  s.user_personal(0, 0) = 1.0;
  std::vector<Triplet> one = {{0, 3, 6}};
  double prev = std::numeric_limits<double>::infinity();
  for (double m = -10.0; m <= 10.0; m += 0.5) {
    s.game_personal(3, 0) = m;
    const double l = bpr_loss(s, *t->ctx, setup, one, 0.0);
    EXPECT_LT(l, prev);
    prev = l;
  }
}

TEST(BprLoss, InvariantUnderUserRelabeling) {
  auto t = toy_instance();
  const ModelState s = random_state(5, 8, 4, 17);
  const auto triplets = toy_triplets(*t->index, 3);
  const double base = bpr_loss(s, *t->ctx, full_setup(), triplets, 1e-2);

  const std::vector<std::uint32_t> perm = {3, 0, 4, 1, 2};  // old -> new
  std::vector<std::vector<std::pair<std::uint32_t, double>>> games(5);
  std::vector<std::vector<std::uint32_t>> friends(5);
  ModelState q = s;
  for (std::uint32_t u = 0; u < 5; ++u) {
    const auto g = t->index->games_of(u);
    const auto m = t->index->minutes_of(u);
    for (std::size_t k = 0; k < g.size(); ++k) games[perm[u]].emplace_back(g[k], m[k]);
    for (const auto f : t->index->friends_of(u)) friends[perm[u]].push_back(perm[f]);
    std::sort(friends[perm[u]].begin(), friends[perm[u]].end());
    q.user_personal.row(perm[u]) = s.user_personal.row(u);
  }
  const PercentileIndex pct(*t->index);
  const ForwardContext ctx(*t->graph, games, friends, pct);
  auto relabeled = triplets;
  for (auto& tr : relabeled) tr.user = perm[tr.user];
  EXPECT_NEAR(bpr_loss(q, ctx, full_setup(), relabeled, 1e-2), base, 1e-10 * std::abs(base));
}

TEST(SampleTriplets, ForcedNegative) {
  std::vector<GameRecord> catalog;
  for (GameId g = 1; g <= 4; ++g) catalog.push_back({g, {"x"}, "d", "p"});
  auto d = canonicalize({{1, 1, 5}, {1, 2, 5}, {1, 3, 5}, {2, 4, 1}}, {}, catalog).dataset;
  const EngagementIndex index(d);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (const auto& t : sample_triplets(index, seed).triplets) {
      if (t.user == 0) EXPECT_EQ(t.negative, 3u);
      EXPECT_TRUE(index.engaged(t.user, t.positive));
      EXPECT_FALSE(index.engaged(t.user, t.negative));
    }
  }
}

TEST(SampleTriplets, CoversEpochAndIsDeterministic) {
  auto t = toy_instance();
  const auto a = sample_triplets(*t->index, 42);
  EXPECT_EQ(a.triplets, sample_triplets(*t->index, 42).triplets);
  EXPECT_NE(a.triplets, sample_triplets(*t->index, 43).triplets);
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> seen;
  for (const auto& tr : a.triplets) ++seen[{tr.user, tr.positive}];
  EXPECT_EQ(seen.size(), t->index->num_engagements());
  for (const auto& [k, n] : seen) EXPECT_EQ(n, 1);
  EXPECT_EQ(sample_triplets(*t->index, 1, 3).triplets.size(), 3 * t->index->num_engagements());
}

TEST(SampleTriplets, SkipsSaturatedUsers) {
  std::vector<GameRecord> catalog = {{1, {"x"}, "d", "p"}, {2, {"x"}, "d", "p"}};
  auto d = canonicalize({{1, 1, 5}, {1, 2, 5}, {2, 1, 3}}, {}, catalog).dataset;
  const auto s = sample_triplets(EngagementIndex(d), 1);
  EXPECT_EQ(s.skipped_users, 1u);
  ASSERT_EQ(s.triplets.size(), 1u);
  EXPECT_EQ(s.triplets[0].negative, 1u);
}

TEST(SampleTriplets, NegativesAreUniform) {
  std::vector<GameRecord> catalog;
  for (GameId g = 1; g <= 50; ++g) catalog.push_back({g, {"x"}, "d", "p"});
  std::vector<Engagement> eng;
  for (GameId g = 1; g <= 5; ++g) eng.push_back({1, g, 10});
  const auto d = canonicalize(eng, {}, catalog).dataset;
  const EngagementIndex index(d);
  std::vector<double> counts(50, 0.0);
  std::size_t n = 0;
  for (std::uint64_t seed = 0; n < 100000; ++seed) {
    for (const auto& t : sample_triplets(index, seed).triplets) {
      counts[t.negative] += 1.0;
      ++n;
    }
  }
  const double p = 1.0 / 45.0;
  const double mean = n * p;
  const double sigma = std::sqrt(n * p * (1 - p));
  for (std::size_t g = 0; g < 5; ++g) EXPECT_EQ(counts[g], 0.0);
  for (std::size_t g = 5; g < 50; ++g) EXPECT_LT(std::abs(counts[g] - mean), 3 * sigma) << g;
}

TEST(Adam, MatchesHandComputedFirstStep) {
  ModelState p = ModelState::zeros(1, 1, 1);
  p.user_personal(0, 0) = 1.0;
  ModelState g = ModelState::zeros(1, 1, 1);
  g.user_personal(0, 0) = 0.5;
  Adam adam(p, 0.1);
  adam.step(p, g);
  // Bias-corrected first step moves by lr * g / (|g| + eps).
  EXPECT_NEAR(p.user_personal(0, 0), 1.0 - 0.1 * 0.5 / (0.5 + 1e-8), 1e-15);
  EXPECT_EQ(p.game_personal(0, 0), 0.0);
}

TEST(Train, ZeroLearningRateKeepsParameters) {
  auto t = toy_instance();
  Hyperparams hp;
  hp.dim = 4;
  hp.learning_rate = 0.0;
  hp.max_epochs = 3;
  hp.batch_size = 4;
  const ModelState init = random_state(5, 8, 4, 1);
  const auto r = train_from(init, *t->index, *t->ctx, EvalSet{}, hp);
  EXPECT_EQ(r.log.size(), 3u);
  r.state.visit([&](std::string_view name, std::span<const double> v) {
    init.visit([&](std::string_view n2, std::span<const double> w) {
      if (name == n2) EXPECT_TRUE(std::equal(v.begin(), v.end(), w.begin())) << name;
    });
  });
}

TEST(Train, NonFiniteLossNamesBatch) {
  auto t = toy_instance();
  Hyperparams hp;
  hp.dim = 4;
  hp.max_epochs = 1;
  ModelState init = random_state(5, 8, 4, 1);
  init.game_personal(2, 1) = std::numeric_limits<double>::infinity();
  try {
    train_from(init, *t->index, *t->ctx, EvalSet{}, hp);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("batch 0"), std::string::npos) << e.what();
  }
}

TEST(Hyperparams, Validation) {
  Hyperparams hp;
  EXPECT_NO_THROW(hp.validate());
  hp.dim = 0;
  EXPECT_THROW(hp.validate(), std::invalid_argument);
  hp = Hyperparams{};
  hp.patience = 0;
  EXPECT_THROW(hp.validate(), std::invalid_argument);
  hp = Hyperparams{};
  hp.lambda = -1;
  EXPECT_THROW(hp.validate(), std::invalid_argument);
  hp = Hyperparams{};
  EXPECT_DOUBLE_EQ(hp.learning_rate, 0.03);
  EXPECT_EQ(hp.batch_size, 1024u);
  EXPECT_DOUBLE_EQ(hp.lambda, 1e-4);
  EXPECT_DOUBLE_EQ(hp.setup.weights.social, 0.1);
  EXPECT_DOUBLE_EQ(hp.setup.weights.context, 0.5);
}

TEST(EpochLog, JsonLine) {
  EpochLog l{3, 1.5, 0.25, 2.0};
  EXPECT_EQ(l.to_json_line(),
            R"({"epoch":3,"train_loss":1.5,"val_ndcg10":0.25,"elapsed_seconds":2.0})");
}

}  // namespace
}  // namespace scgrec
