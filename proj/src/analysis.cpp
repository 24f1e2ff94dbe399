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
#include "scgrec/analysis.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <fmt/core.h>
#include <fmt/os.h>
#include <nlohmann/json.hpp>

#include "scgrec/context_graph.hpp"

namespace scgrec {
namespace {

constexpr double kLogBinWidth = 0.5;
constexpr std::size_t kSimilarityBins = 10;

Histogram unit_bins(std::size_t max_value) {
  Histogram h;
  for (std::size_t k = 0; k <= max_value + 1; ++k) h.bin_edges.push_back(static_cast<double>(k));
  h.counts.assign(max_value + 1, 0);
  return h;
}

Histogram fixed_bins(double lo, double width, std::size_t n) {
  Histogram h;
  for (std::size_t k = 0; k <= n; ++k) h.bin_edges.push_back(lo + width * static_cast<double>(k));
  h.counts.assign(n, 0);
  return h;
}

std::uint32_t require_game(const EngagementIndex& index, GameId id) {
  const auto g = index.game_index(id);
  if (!g) throw std::invalid_argument(fmt::format("unknown game {}", id));
  return *g;
}

// Sorted-intersection positions (k in a, m in b).
template <typename Fn>
void intersect(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b, Fn&& fn) {
  std::size_t x = 0, y = 0;
  while (x < a.size() && y < b.size()) {
    if (a[x] < b[y]) {
      ++x;
    } else if (b[y] < a[x]) {
      ++y;
    } else {
      fn(x++, y++);
    }
  }
}

std::string fmt_opt(const std::optional<double>& v) {
  return v ? fmt::format("{:.6f}", *v) : std::string();
}

void write_histogram(const Histogram& h, const std::filesystem::path& path) {
  auto out = fmt::output_file(path.string());
  out.print("bin_lo,bin_hi,count\n");
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    out.print("{},{},{}\n", h.bin_edges[k], h.bin_edges[k + 1], h.counts[k]);
  }
}

}  // namespace

std::uint64_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

std::optional<std::size_t> Histogram::bin_of(double x) const {
  if (bin_edges.size() < 2 || x < bin_edges.front() || x > bin_edges.back()) return std::nullopt;
  const auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), x);
  const auto k = static_cast<std::size_t>(it - bin_edges.begin());
  return std::min(k, counts.size()) - 1;
}

std::pair<Histogram, Histogram> engagement_histograms(const Dataset& d) {
  std::vector<std::size_t> per_user;
  for (std::size_t i = 0; i < d.engagements.size();) {
    std::size_t j = i;
    while (j < d.engagements.size() && d.engagements[j].user == d.engagements[i].user) ++j;
    per_user.push_back(j - i);
    i = j;
  }
  const std::size_t max_count =
      per_user.empty() ? 0 : *std::max_element(per_user.begin(), per_user.end());
  Histogram games = unit_bins(max_count);
  for (const auto c : per_user) ++games.counts[c];

  double max_log = 0.0;
  for (const auto& e : d.engagements) {
    if (e.minutes > 0.0) max_log = std::max(max_log, std::log(e.minutes));
  }
  const auto nbins = static_cast<std::size_t>(std::floor(max_log / kLogBinWidth)) + 1;
  Histogram dwell = fixed_bins(0.0, kLogBinWidth, nbins);
  for (const auto& e : d.engagements) {
    const double l = e.minutes > 0.0 ? std::log(e.minutes) : 0.0;
    const auto k = l <= 0.0 ? 0 : static_cast<std::size_t>(std::floor(l / kLogBinWidth));
    ++dwell.counts[std::min(k, nbins - 1)];
  }
  return {std::move(games), std::move(dwell)};
}

std::vector<std::string> genres_by_popularity(const Dataset& d) {
  std::unordered_map<GameId, const GameRecord*> catalog;
  for (const auto& g : d.catalog) catalog.emplace(g.game, &g);
  std::map<std::string, std::size_t> users;
  for (const auto& g : d.catalog) {
    for (const auto& genre : g.genres) users.emplace(genre, 0);
  }
  for (std::size_t i = 0; i < d.engagements.size();) {
    std::size_t j = i;
    std::unordered_set<std::string> seen;
    for (; j < d.engagements.size() && d.engagements[j].user == d.engagements[i].user; ++j) {
      for (const auto& genre : catalog.at(d.engagements[j].game)->genres) seen.insert(genre);
    }
    for (const auto& genre : seen) ++users[genre];
    i = j;
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(users.begin(), users.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (const auto& [genre, count] : ranked) out.push_back(genre);
  return out;
}

GenreMatrix genre_conditional(const Dataset& d, const std::vector<std::string>& genres) {
  if (genres.empty()) throw std::invalid_argument("genre list is empty");
  std::unordered_set<std::string> known;
  for (const auto& g : d.catalog) known.insert(g.genres.begin(), g.genres.end());
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t k = 0; k < genres.size(); ++k) {
    if (!known.contains(genres[k])) {
      throw std::invalid_argument(fmt::format("unknown genre '{}'", genres[k]));
    }
    position.emplace(genres[k], k);
  }
  std::unordered_map<GameId, std::vector<std::size_t>> game_genres;
  for (const auto& g : d.catalog) {
    auto& list = game_genres[g.game];
    for (const auto& genre : g.genres) {
      if (auto it = position.find(genre); it != position.end()) list.push_back(it->second);
    }
  }

  const std::size_t n = genres.size();
  std::vector<std::uint64_t> joint(n * n, 0);
  std::vector<char> played(n);
  for (std::size_t i = 0; i < d.engagements.size();) {
    std::fill(played.begin(), played.end(), 0);
    std::size_t j = i;
    for (; j < d.engagements.size() && d.engagements[j].user == d.engagements[i].user; ++j) {
      for (const auto k : game_genres[d.engagements[j].game]) played[k] = 1;
    }
    for (std::size_t a = 0; a < n; ++a) {
      if (!played[a]) continue;
      for (std::size_t b = 0; b < n; ++b) joint[a * n + b] += played[b] ? 1 : 0;
    }
    i = j;
  }
  GenreMatrix m;
  m.genres = genres;
  m.values.resize(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const auto users_b = joint[b * n + b];
      if (users_b > 0) {
        m.values[a * n + b] = static_cast<double>(joint[a * n + b]) / static_cast<double>(users_b);
      }
    }
  }
  return m;
}

double co_purchase_score(const EngagementIndex& index, GameId i, GameId j) {
  const auto a = index.users_of(require_game(index, i));
  const auto b = index.users_of(require_game(index, j));
  const std::size_t denom = a.size() + b.size();
  if (denom == 0) return 0.0;
  std::size_t shared = 0;
  intersect(a, b, [&shared](std::size_t, std::size_t) { ++shared; });
  return static_cast<double>(shared) / static_cast<double>(denom);
}

double co_purchase_score(const Dataset& d, GameId i, GameId j) {
  return co_purchase_score(EngagementIndex(d), i, j);
}

std::optional<double> co_dwelling_score(const EngagementIndex& index, GameId i, GameId j,
                                        double T) {
  if (!(T > 0.0)) throw std::invalid_argument("T must be > 0");
  const auto gi = require_game(index, i);
  const auto gj = require_game(index, j);
  const auto ua = index.users_of(gi);
  const auto ub = index.users_of(gj);
  const auto ma = index.game_minutes(gi);
  const auto mb = index.game_minutes(gj);
  double sa = 0.0, sb = 0.0;
  std::size_t n = 0;
  intersect(ua, ub, [&](std::size_t x, std::size_t y) {
    sa += ma[x];
    sb += mb[y];
    ++n;
  });
  if (n == 0) return std::nullopt;
  return std::exp(-std::abs(sa / n - sb / n) / T);
}

std::optional<double> co_dwelling_score(const Dataset& d, GameId i, GameId j, double T) {
  return co_dwelling_score(EngagementIndex(d), i, j, T);
}

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

SocialCorrelation social_dwelling_correlation(const EngagementIndex& index, GameId game,
                                              std::uint64_t seed) {
  const auto g = require_game(index, game);
  const auto players = index.users_of(g);
  const auto minutes = index.game_minutes(g);
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, players.empty() ? 0 : players.size() - 1);

  std::vector<double> x, y, rx, ry;
  for (std::size_t k = 0; k < players.size(); ++k) {
    const auto u = players[k];
    const auto friends = index.friends_of(u);
    double total = 0.0;
    std::size_t count = 0;
    intersect(friends, players, [&](std::size_t, std::size_t m) {
      total += minutes[m];
      ++count;
    });
    if (count == 0) continue;
    x.push_back(minutes[k]);
    y.push_back(total / static_cast<double>(count));

    // Same-size sample of non-friend players, without replacement.
    const std::size_t available = players.size() - 1 - count;
    const std::size_t need = std::min(count, available);
    if (need == 0) continue;
    std::unordered_set<std::size_t> chosen;
    double sampled = 0.0;
    while (chosen.size() < need) {
      const std::size_t m = pick(rng);
      if (m == k || std::binary_search(friends.begin(), friends.end(), players[m]) ||
          chosen.contains(m)) {
        continue;
      }
      chosen.insert(m);
      sampled += minutes[m];
    }
    rx.push_back(minutes[k]);
    ry.push_back(sampled / static_cast<double>(need));
  }
  return {pearson(x, y), pearson(rx, ry), x.size()};
}

SocialCorrelation social_dwelling_correlation(const Dataset& d, GameId game, std::uint64_t seed) {
  return social_dwelling_correlation(EngagementIndex(d), game, seed);
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

SimilarityHistograms genre_similarity_histogram(const Dataset& d, std::size_t top_k_genres,
                                                std::uint64_t seed) {
  if (top_k_genres < 1) throw std::invalid_argument("top_k_genres must be >= 1");
  auto top = genres_by_popularity(d);
  if (top.size() > top_k_genres) top.resize(top_k_genres);
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t k = 0; k < top.size(); ++k) position.emplace(top[k], k);
  std::unordered_map<GameId, std::vector<std::size_t>> game_genres;
  for (const auto& g : d.catalog) {
    for (const auto& genre : g.genres) {
      if (auto it = position.find(genre); it != position.end()) {
        game_genres[g.game].push_back(it->second);
      }
    }
  }

  const EngagementIndex index(d);
  const std::size_t nu = index.num_users();
  std::vector<std::vector<double>> vec(nu, std::vector<double>(top.size(), 0.0));
  for (std::uint32_t u = 0; u < nu; ++u) {
    const auto games = index.games_of(u);
    const auto mins = index.minutes_of(u);
    for (std::size_t k = 0; k < games.size(); ++k) {
      for (const auto p : game_genres[index.game_ids()[games[k]]]) vec[u][p] += mins[k];
    }
    for (auto& v : vec[u]) v = std::log1p(v);
  }

  SimilarityHistograms out;
  out.friends = fixed_bins(0.0, 1.0 / kSimilarityBins, kSimilarityBins);
  out.non_friends = fixed_bins(0.0, 1.0 / kSimilarityBins, kSimilarityBins);
  out.friends.bin_edges.back() = 1.0;
  out.non_friends.bin_edges.back() = 1.0;
  auto bin = [](double c) {
    const double clamped = std::clamp(c, 0.0, 1.0);
    return std::min(kSimilarityBins - 1,
                    static_cast<std::size_t>(std::floor(clamped * kSimilarityBins)));
  };

  std::size_t edges = 0;
  for (std::uint32_t u = 0; u < nu; ++u) {
    for (const auto v : index.friends_of(u)) {
      if (v <= u) continue;
      const double c = cosine(vec[u], vec[v]);
      ++out.friends.counts[bin(c)];
      out.friends_mean += c;
      ++edges;
    }
  }
  if (edges > 0) out.friends_mean /= static_cast<double>(edges);

  // As many random non-friend pairs, when enough exist.
  const double possible = 0.5 * static_cast<double>(nu) * static_cast<double>(nu > 0 ? nu - 1 : 0);
  const std::size_t want =
      std::min<std::size_t>(edges, static_cast<std::size_t>(std::max(0.0, possible - edges)));
  if (want > 0) {
    Rng rng(seed);
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(nu - 1));
    std::unordered_set<std::uint64_t> used;
    std::size_t got = 0;
    while (got < want) {
      std::uint32_t a = pick(rng), b = pick(rng);
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      const auto f = index.friends_of(a);
      if (std::binary_search(f.begin(), f.end(), b)) continue;
      if (!used.insert((std::uint64_t{a} << 32) | b).second) continue;
      const double c = cosine(vec[a], vec[b]);
      ++out.non_friends.counts[bin(c)];
      out.non_friends_mean += c;
      ++got;
    }
    out.non_friends_mean /= static_cast<double>(got);
  }
  return out;
}

Histogram friend_count_distribution(const Dataset& d) {
  const EngagementIndex index(d);
  std::size_t max_degree = 0;
  for (std::uint32_t u = 0; u < index.num_users(); ++u) {
    max_degree = std::max(max_degree, index.friends_of(u).size());
  }
  Histogram h = unit_bins(max_degree);
  for (std::uint32_t u = 0; u < index.num_users(); ++u) ++h.counts[index.friends_of(u).size()];
  return h;
}

void write_analysis(const Dataset& d, const AnalysisOptions& options,
                    const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json summary;
  const EngagementIndex index(d);
  summary["users"] = index.num_users();
  summary["games"] = index.num_games();
  summary["engagements"] = index.num_engagements();
  summary["social_edges"] = index.num_social_edges();

  const auto [games_hist, dwell_hist] = engagement_histograms(d);
  write_histogram(games_hist, dir / "engagement_count_hist.csv");
  write_histogram(dwell_hist, dir / "dwelling_log_hist.csv");

  auto genres = genres_by_popularity(d);
  if (genres.size() > options.top_genres) genres.resize(options.top_genres);
  if (!genres.empty()) {
    const auto m = genre_conditional(d, genres);
    auto out = fmt::output_file((dir / "genre_conditional.csv").string());
    out.print("given");
    for (const auto& g : genres) out.print(",{}", g);
    out.print("\n");
    // Row B (the conditioning genre), column A: P(A | B).
    for (std::size_t b = 0; b < genres.size(); ++b) {
      out.print("{}", genres[b]);
      for (std::size_t a = 0; a < genres.size(); ++a) out.print(",{}", fmt_opt(m.at(a, b)));
      out.print("\n");
    }
    summary["top_genres"] = genres;
  }

  // Most played games for the pairwise matrices and social correlations.
  std::vector<std::uint32_t> top(index.num_games());
  std::iota(top.begin(), top.end(), 0);
  std::stable_sort(top.begin(), top.end(), [&index](std::uint32_t a, std::uint32_t b) {
    return index.users_of(a).size() > index.users_of(b).size();
  });
  if (top.size() > options.top_games) top.resize(options.top_games);
  const auto& ids = index.game_ids();
  double T = options.dwell_T;
  if (!(T > 0.0)) T = default_dwelling_normalizer(co_engagement_pairs(index));
  summary["dwell_T"] = T;
  {
    auto cp = fmt::output_file((dir / "copurchase_matrix.csv").string());
    auto cd = fmt::output_file((dir / "codwelling_matrix.csv").string());
    cp.print("game");
    cd.print("game");
    for (const auto g : top) {
      cp.print(",{}", ids[g]);
      cd.print(",{}", ids[g]);
    }
    cp.print("\n");
    cd.print("\n");
    for (const auto a : top) {
      cp.print("{}", ids[a]);
      cd.print("{}", ids[a]);
      for (const auto b : top) {
        cp.print(",{:.6f}", co_purchase_score(index, ids[a], ids[b]));
        cd.print(",{}", fmt_opt(co_dwelling_score(index, ids[a], ids[b], T)));
      }
      cp.print("\n");
      cd.print("\n");
    }
  }
  {
    auto out = fmt::output_file((dir / "social_correlation.csv").string());
    out.print("game,pairs,friend_r,random_r\n");
    for (const auto g : top) {
      const auto r = social_dwelling_correlation(index, ids[g], derive_seed(options.seed, g));
      out.print("{},{},{},{}\n", ids[g], r.pairs, fmt_opt(r.friend_r), fmt_opt(r.random_r));
    }
  }
  {
    const auto sim = genre_similarity_histogram(d, options.top_genres, options.seed);
    auto out = fmt::output_file((dir / "genre_similarity_hist.csv").string());
    out.print("bin_lo,bin_hi,friends,non_friends\n");
    for (std::size_t k = 0; k < sim.friends.counts.size(); ++k) {
      out.print("{},{},{},{}\n", sim.friends.bin_edges[k], sim.friends.bin_edges[k + 1],
                sim.friends.counts[k], sim.non_friends.counts[k]);
    }
    summary["friend_cosine_mean"] = sim.friends_mean;
    summary["non_friend_cosine_mean"] = sim.non_friends_mean;
  }
  write_histogram(friend_count_distribution(d), dir / "friend_count_hist.csv");
  std::ofstream(dir / "analysis_summary.json") << summary.dump(2) << '\n';
}

}  // namespace scgrec
