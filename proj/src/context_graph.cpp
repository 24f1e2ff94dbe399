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
#include "scgrec/context_graph.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <fmt/core.h>
#include <fmt/os.h>
#include <nlohmann/json.hpp>

namespace scgrec {
namespace {

EdgeSet normalize_edges(EdgeSet edges) {
  for (auto& e : edges) {
    if (e.a > e.b) std::swap(e.a, e.b);
  }
  std::erase_if(edges, [](const ScoredEdge& e) { return e.a == e.b; });
  std::stable_sort(edges.begin(), edges.end(), [](const ScoredEdge& x, const ScoredEdge& y) {
    return std::tie(x.a, x.b) < std::tie(y.a, y.b);
  });
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const ScoredEdge& x, const ScoredEdge& y) {
                            return x.a == y.a && x.b == y.b;
                          }),
              edges.end());
  return edges;
}

void add_clique(const std::vector<GameId>& members, EdgeSet& out) {
  for (std::size_t x = 0; x < members.size(); ++x) {
    for (std::size_t y = x + 1; y < members.size(); ++y) {
      out.push_back({members[x], members[y], 1.0});
    }
  }
}

}  // namespace

std::string_view relation_name(RelationKind kind) {
  switch (kind) {
    case RelationKind::kCoGenre: return "co_genre";
    case RelationKind::kCoDeveloper: return "co_developer";
    case RelationKind::kCoPublisher: return "co_publisher";
    case RelationKind::kCoPurchase: return "co_purchase";
    case RelationKind::kCoDwelling: return "co_dwelling";
  }
  throw std::invalid_argument("unknown relation kind");
}

bool is_feature_relation(RelationKind kind) {
  return kind == RelationKind::kCoGenre || kind == RelationKind::kCoDeveloper ||
         kind == RelationKind::kCoPublisher;
}

EdgeSet build_feature_relation(const std::vector<GameRecord>& catalog, RelationKind kind) {
  if (!is_feature_relation(kind)) {
    throw std::invalid_argument(
        fmt::format("{} is not a feature-based relation", relation_name(kind)));
  }
  // Label -> games carrying it. Empty labels mean "unknown" and link nothing.
  std::map<std::string, std::vector<GameId>> groups;
  for (const auto& g : catalog) {
    switch (kind) {
      case RelationKind::kCoGenre:
        for (const auto& genre : g.genres) groups[genre].push_back(g.game);
        break;
      case RelationKind::kCoDeveloper:
        if (!g.developer.empty()) groups[g.developer].push_back(g.game);
        break;
      default:
        if (!g.publisher.empty()) groups[g.publisher].push_back(g.game);
        break;
    }
  }
  EdgeSet edges;
  for (const auto& [label, members] : groups) add_clique(members, edges);
  return normalize_edges(std::move(edges));
}

std::vector<PairStats> co_engagement_pairs(const EngagementIndex& index, int threads) {
  const std::size_t ng = index.num_games();
  std::vector<std::vector<PairStats>> rows(ng);
  parallel_for(ng, threads, [&](std::size_t a) {
    std::vector<std::uint32_t> count(ng, 0);
    std::vector<double> sum_a(ng, 0.0);
    std::vector<double> sum_b(ng, 0.0);
    std::vector<std::uint32_t> touched;
    const auto users = index.users_of(static_cast<std::uint32_t>(a));
    const auto minutes = index.game_minutes(static_cast<std::uint32_t>(a));
    for (std::size_t k = 0; k < users.size(); ++k) {
      const auto games = index.games_of(users[k]);
      const auto mins = index.minutes_of(users[k]);
      // games are sorted; only pairs with b > a
      auto it = std::upper_bound(games.begin(), games.end(), static_cast<std::uint32_t>(a));
      for (auto pos = static_cast<std::size_t>(it - games.begin()); pos < games.size(); ++pos) {
        const std::uint32_t b = games[pos];
        if (count[b]++ == 0) touched.push_back(b);
        sum_a[b] += minutes[k];
        sum_b[b] += mins[pos];
      }
    }
    std::sort(touched.begin(), touched.end());
    auto& row = rows[a];
    row.reserve(touched.size());
    for (const std::uint32_t b : touched) {
      row.push_back({static_cast<std::uint32_t>(a), b, count[b], sum_a[b] / count[b],
                     sum_b[b] / count[b]});
    }
  });
  std::vector<PairStats> out;
  for (auto& row : rows) out.insert(out.end(), row.begin(), row.end());
  return out;
}

EdgeSet build_co_purchase(const EngagementIndex& index, double tau_p, int threads) {
  if (!(tau_p >= 0.0)) throw std::invalid_argument("tau_p must be >= 0");
  const auto& ids = index.game_ids();
  EdgeSet edges;
  for (const auto& p : co_engagement_pairs(index, threads)) {
    const double denom =
        static_cast<double>(index.users_of(p.a).size() + index.users_of(p.b).size());
    const double score = p.shared / denom;
    if (score > tau_p) edges.push_back({ids[p.a], ids[p.b], score});
  }
  return edges;
}

double default_dwelling_normalizer(std::span<const PairStats> pairs) {
  if (pairs.empty()) return 1.0;
  double total = 0.0;
  for (const auto& p : pairs) total += std::abs(p.mean_a - p.mean_b);
  const double mean = total / static_cast<double>(pairs.size());
  return mean > 0.0 ? mean : 1.0;
}

CoDwellingResult build_co_dwelling(const EngagementIndex& index, double tau_t,
                                   std::optional<double> T, int threads) {
  if (!(tau_t >= 0.0 && tau_t < 1.0)) throw std::invalid_argument("tau_t must lie in [0, 1)");
  if (T && !(*T > 0.0)) throw std::invalid_argument("T must be > 0");
  const auto pairs = co_engagement_pairs(index, threads);
  CoDwellingResult result;
  result.T = T ? *T : default_dwelling_normalizer(pairs);
  const auto& ids = index.game_ids();
  for (const auto& p : pairs) {
    const double score = std::exp(-std::abs(p.mean_a - p.mean_b) / result.T);
    if (score > tau_t) result.edges.push_back({ids[p.a], ids[p.b], score});
  }
  return result;
}

ContextGraph ContextGraph::assemble(const std::vector<GameId>& games,
                                    std::vector<std::pair<RelationKind, EdgeSet>> relations) {
  std::array<bool, kNumRelations> seen{};
  for (const auto& [kind, edges] : relations) {
    const auto k = static_cast<std::size_t>(kind);
    if (k >= kNumRelations) throw std::invalid_argument("invalid relation kind");
    if (seen[k]) {
      throw std::invalid_argument(fmt::format("relation {} given twice", relation_name(kind)));
    }
    seen[k] = true;
  }
  for (std::size_t k = 0; k < kNumRelations; ++k) {
    if (!seen[k]) {
      throw std::invalid_argument(
          fmt::format("relation {} missing", relation_name(kAllRelations[k])));
    }
  }

  ContextGraph g;
  g.games_ = games;
  std::unordered_map<GameId, std::uint32_t> lookup;
  for (std::uint32_t i = 0; i < games.size(); ++i) lookup.emplace(games[i], i);

  for (auto& [kind, edges] : relations) {
    auto& csr = g.rel_[static_cast<std::size_t>(kind)];
    struct Arc {
      std::uint32_t from, to;
      double score;
    };
    std::vector<Arc> arcs;
    for (const auto& e : normalize_edges(std::move(edges))) {
      const auto a = lookup.find(e.a);
      const auto b = lookup.find(e.b);
      if (a == lookup.end() || b == lookup.end()) {
        throw std::invalid_argument(fmt::format("{} edge ({}, {}) references unknown game",
                                                relation_name(kind), e.a, e.b));
      }
      arcs.push_back({a->second, b->second, e.score});
      arcs.push_back({b->second, a->second, e.score});
    }
    std::sort(arcs.begin(), arcs.end(), [](const Arc& x, const Arc& y) {
      return std::tie(x.from, x.to) < std::tie(y.from, y.to);
    });
    csr.offsets.assign(games.size() + 1, 0);
    for (const auto& arc : arcs) ++csr.offsets[arc.from + 1];
    std::partial_sum(csr.offsets.begin(), csr.offsets.end(), csr.offsets.begin());
    csr.targets.reserve(arcs.size());
    csr.scores.reserve(arcs.size());
    for (const auto& arc : arcs) {
      csr.targets.push_back(arc.to);
      csr.scores.push_back(arc.score);
    }
  }
  return g;
}

std::span<const std::uint32_t> ContextGraph::neighbors(std::uint32_t game,
                                                       RelationKind kind) const {
  const auto& csr = rel_[static_cast<std::size_t>(kind)];
  return {csr.targets.data() + csr.offsets[game], csr.offsets[game + 1] - csr.offsets[game]};
}

std::span<const double> ContextGraph::scores(std::uint32_t game, RelationKind kind) const {
  const auto& csr = rel_[static_cast<std::size_t>(kind)];
  return {csr.scores.data() + csr.offsets[game], csr.offsets[game + 1] - csr.offsets[game]};
}

std::size_t ContextGraph::neighbor_count(std::uint32_t game, RelationKind kind) const {
  const auto& csr = rel_[static_cast<std::size_t>(kind)];
  return csr.offsets[game + 1] - csr.offsets[game];
}

std::size_t ContextGraph::num_edges(RelationKind kind) const {
  return rel_[static_cast<std::size_t>(kind)].targets.size() / 2;
}

EdgeSet ContextGraph::edges(RelationKind kind) const {
  EdgeSet out;
  for (std::uint32_t i = 0; i < games_.size(); ++i) {
    const auto nb = neighbors(i, kind);
    const auto sc = scores(i, kind);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (nb[k] > i) out.push_back({games_[i], games_[nb[k]], sc[k]});
    }
  }
  return out;
}

GraphBuild build_context_graph(const Dataset& train, const EngagementIndex& index,
                               const GraphThresholds& thresholds, int threads) {
  std::vector<std::pair<RelationKind, EdgeSet>> relations;
  for (auto kind : {RelationKind::kCoGenre, RelationKind::kCoDeveloper,
                    RelationKind::kCoPublisher}) {
    relations.emplace_back(kind, build_feature_relation(train.catalog, kind));
  }
  relations.emplace_back(RelationKind::kCoPurchase,
                         build_co_purchase(index, thresholds.tau_p, threads));
  auto dwell = build_co_dwelling(index, thresholds.tau_t, thresholds.T, threads);
  relations.emplace_back(RelationKind::kCoDwelling, std::move(dwell.edges));
  return {ContextGraph::assemble(index.game_ids(), std::move(relations)), dwell.T};
}

void write_context_graph(const ContextGraph& graph, const GraphThresholds& thresholds, double T,
                         const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["format_version"] = 1;
  manifest["num_games"] = graph.num_games();
  manifest["tau_p"] = thresholds.tau_p;
  manifest["tau_t"] = thresholds.tau_t;
  manifest["T"] = T;
  manifest["T_source"] = thresholds.T ? "configured" : "mean_pair_gap";
  auto& counts = manifest["edge_counts"];
  for (auto kind : kAllRelations) {
    const auto name = std::string(relation_name(kind));
    auto out = fmt::output_file((dir / (name + ".tsv")).string());
    for (const auto& e : graph.edges(kind)) out.print("{}\t{}\t{}\n", e.a, e.b, e.score);
    counts[name] = graph.num_edges(kind);
  }
  std::ofstream(dir / "graph_manifest.json") << manifest.dump(2) << '\n';
}

ContextGraph read_context_graph(const std::vector<GameId>& games,
                                const std::filesystem::path& dir) {
  std::vector<std::pair<RelationKind, EdgeSet>> relations;
  for (auto kind : kAllRelations) {
    const auto path = dir / (std::string(relation_name(kind)) + ".tsv");
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
    EdgeSet edges;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
      ++number;
      if (line.empty()) continue;
      std::istringstream fields(line);
      ScoredEdge e;
      if (!(fields >> e.a >> e.b >> e.score)) {
        throw ParseError(path.string(), number, "expected game_i<TAB>game_j<TAB>score");
      }
      edges.push_back(e);
    }
    relations.emplace_back(kind, std::move(edges));
  }
  return ContextGraph::assemble(games, std::move(relations));
}

}  // namespace scgrec
