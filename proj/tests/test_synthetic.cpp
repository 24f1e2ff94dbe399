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
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "scgrec/synthetic.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace scgrec {
namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SynthConfig small(std::uint64_t seed, double homophily) {
  SynthConfig c;
  c.n_users = 1000;
  c.n_games = 120;
  c.homophily = homophily;
  c.seed = seed;
  return c;
}

struct CosineStats {
  double mean = 0, var = 0;
  std::size_t n = 0;
};

CosineStats stats(const std::vector<double>& xs) {
  CosineStats s;
  s.n = xs.size();
  for (double x : xs) s.mean += x / s.n;
  for (double x : xs) s.var += (x - s.mean) * (x - s.mean) / (s.n - 1);
  return s;
}

// Preference cosine over friend edges and over an equal number of random non-edges.
std::pair<CosineStats, CosineStats> friend_vs_random(const SynthData& d, std::uint64_t seed) {
  const auto& lat = d.latents;
  std::set<std::pair<UserId, UserId>> edges;
  std::vector<double> f, r;
  for (const auto& e : d.dataset.social) {
    edges.insert({e.a, e.b});
    f.push_back(cosine_similarity(lat.user_preference[e.a - 1], lat.user_preference[e.b - 1]));
  }
  Rng rng(seed);
  std::uniform_int_distribution<UserId> pick(1, lat.user_ids.size());
  while (r.size() < f.size()) {
    UserId a = pick(rng), b = pick(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (edges.count({a, b})) continue;
    r.push_back(cosine_similarity(lat.user_preference[a - 1], lat.user_preference[b - 1]));
  }
  return {stats(f), stats(r)};
}

TEST(Synthetic, SameSeedGivesIdenticalFiles) {
  const auto c = small(3, 0.7);
  const auto a = testing::temp_dir("synth_a");
  const auto b = testing::temp_dir("synth_b");
  write_synthetic(generate(c), c, a);
  write_synthetic(generate(c), c, b);
  for (const char* f : {"engagements.tsv", "social.tsv", "catalog.tsv", "latents.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    EXPECT_FALSE(slurp(a / f).empty());
  }
  auto other = c;
  other.seed = 4;
  EXPECT_NE(generate(other).dataset, generate(c).dataset);
}

TEST(Synthetic, FullHomophilyRaisesFriendSimilarity) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto [f, r] = friend_vs_random(generate(small(seed, 1.0)), seed);
    EXPECT_GT(f.mean, r.mean) << seed;
  }
}

TEST(Synthetic, ZeroHomophilyMatchesRandomPairs) {
  const auto [f, r] = friend_vs_random(generate(small(5, 0.0)), 5);
  const double se = std::sqrt(f.var / f.n + r.var / r.n);
  EXPECT_LT(std::abs(f.mean - r.mean), 2.0 * se);
}

TEST(Synthetic, LongTailedCountsAndLogNormalDwell) {
  const SynthConfig c;
  const auto d = generate(c).dataset;
  std::map<UserId, double> counts;
  std::vector<double> logs;
  for (const auto& e : d.engagements) {
    counts[e.user] += 1;
    if (e.minutes > 0) logs.push_back(std::log(e.minutes));
  }
  std::vector<double> x;
  for (const auto& [u, n] : counts) x.push_back(n);
  const auto s = stats(x);
  double m3 = 0;
  for (double v : x) m3 += std::pow(v - s.mean, 3) / x.size();
  EXPECT_GT(m3 / std::pow(s.var, 1.5), 1.0);
  EXPECT_NEAR(s.mean, double(c.engagements_per_user), 1.0);
  // Location 4.8 plus up to 2 * dwell_scale; spread from noise (1.0) and length (0.8).
  const auto l = stats(logs);
  EXPECT_GT(l.mean, 4.3);
  EXPECT_LT(l.mean, 4.8 + 2.0 * c.dwell_scale + 0.5);
  EXPECT_GT(l.var, 1.0);
  EXPECT_LT(l.var, 1.0 + 0.64 + 1.0);
}

TEST(Synthetic, CatalogShape) {
  const auto c = small(2, 0.7);
  const auto d = generate(c);
  ASSERT_EQ(d.dataset.catalog.size(), c.n_games);
  for (const auto& g : d.dataset.catalog) {
    EXPECT_GE(g.genres.size(), 1u);
    EXPECT_LE(g.genres.size(), 2u);
    EXPECT_FALSE(g.developer.empty());
    EXPECT_FALSE(g.publisher.empty());
  }
  for (const auto& p : d.latents.user_preference) {
    double total = 0;
    for (double x : p) total += x;
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
  SynthConfig bad;
  bad.homophily = 1.5;
  EXPECT_THROW(generate(bad), std::invalid_argument);
}

TEST(PlantedRelevance, SelfConsistent) {
  const auto d = generate(small(6, 0.7));
  const auto& lat = d.latents;
  for (std::size_t u = 0; u < 50; ++u) {
    const auto order = planted_relevance(lat, u);
    ASSERT_EQ(order.size(), lat.game_ids.size());
    for (std::size_t k = 1; k < order.size(); ++k) {
      EXPECT_GE(lat.affinity(u, order[k - 1] - 1), lat.affinity(u, order[k] - 1));
    }
    std::vector<std::uint32_t> ranked;
    for (auto g : order) ranked.push_back(static_cast<std::uint32_t>(g));
    const std::set<std::uint32_t> top(ranked.begin(), ranked.begin() + 10);
    EXPECT_DOUBLE_EQ(oracle::brute_metrics(ranked, top, 10).ndcg, 1.0);
  }
}

TEST(PlantedRelevance, FavoriteGenreLeads) {
  const auto d = generate(small(7, 0.7));
  const auto& lat = d.latents;
  double share = 0;
  const std::size_t users = 200;
  for (std::size_t u = 0; u < users; ++u) {
    const auto& p = lat.user_preference[u];
    const std::size_t fav = std::max_element(p.begin(), p.end()) - p.begin();
    const auto order = planted_relevance(lat, u);
    int hits = 0;
    for (std::size_t k = 0; k < 10; ++k) {
      const auto& genres = lat.game_genres[order[k] - 1];
      hits += std::find(genres.begin(), genres.end(), fav) != genres.end();
    }
    share += hits / 10.0 / users;
  }
  EXPECT_GT(share, 0.5);
}

TEST(PlantedRelevance, IdenticalLatentsRankIdentically) {
  auto lat = generate(small(8, 0.7)).latents;
  lat.user_preference[1] = lat.user_preference[0];
  EXPECT_EQ(planted_relevance(lat, 0), planted_relevance(lat, 1));
}

TEST(Latents, RoundTrip) {
  const auto c = small(9, 0.7);
  const auto d = generate(c);
  const auto dir = testing::temp_dir("latents");
  write_synthetic(d, c, dir);
  const auto back = read_latents(dir / "latents.json");
  EXPECT_EQ(back.user_ids, d.latents.user_ids);
  EXPECT_EQ(back.game_genres, d.latents.game_genres);
  EXPECT_EQ(back.user_preference, d.latents.user_preference);
  EXPECT_EQ(back.game_popularity, d.latents.game_popularity);
  EXPECT_EQ(back.game_length, d.latents.game_length);
}

TEST(Cosine, HandValues) {
  EXPECT_DOUBLE_EQ(cosine_similarity({1, 0}, {0, 1}), 0.0);
  EXPECT_NEAR(cosine_similarity({1, 1}, {2, 2}), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(cosine_similarity({0, 0}, {1, 1}), 0.0);
}

}  // namespace
}  // namespace scgrec
