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
#include "scgrec/evaluation.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

namespace scgrec {

const CutoffMetrics& MetricsReport::at(std::size_t k) const {
  for (const auto& c : cutoffs) {
    if (c.k == k) return c;
  }
  throw std::out_of_range(fmt::format("no metrics at K={}", k));
}

std::vector<std::uint32_t> rank_for_user(std::span<const double> scores,
                                         std::span<const std::uint32_t> exclude, std::size_t k) {
  if (k < 1) throw std::invalid_argument("K must be >= 1");
  std::vector<std::uint32_t> candidates;
  candidates.reserve(scores.size());
  for (std::uint32_t i = 0; i < scores.size(); ++i) {
    if (!std::binary_search(exclude.begin(), exclude.end(), i)) candidates.push_back(i);
  }
  const std::size_t take = std::min(k, candidates.size());
  auto better = [&scores](std::uint32_t a, std::uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                    candidates.end(), better);
  candidates.resize(take);
  return candidates;
}

std::vector<std::uint32_t> rank_for_user(const Recommender& rec, std::uint32_t user,
                                         std::span<const std::uint32_t> exclude, std::size_t k) {
  const auto s = rec.scores(user);
  return rank_for_user(s, exclude, k);
}

RankMetrics rank_metrics(std::span<const std::uint32_t> ranked,
                         std::span<const std::uint32_t> relevant, std::size_t k) {
  if (relevant.empty()) throw std::invalid_argument("relevant set is empty");
  if (k < 1) throw std::invalid_argument("K must be >= 1");
  std::vector<std::uint32_t> rel(relevant.begin(), relevant.end());
  std::sort(rel.begin(), rel.end());
  rel.erase(std::unique(rel.begin(), rel.end()), rel.end());

  const std::size_t depth = std::min(k, ranked.size());
  double dcg = 0.0;
  std::size_t hits = 0;
  for (std::size_t p = 0; p < depth; ++p) {
    if (std::binary_search(rel.begin(), rel.end(), ranked[p])) {
      ++hits;
      dcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
    }
  }
  double idcg = 0.0;
  for (std::size_t p = 0; p < std::min(k, rel.size()); ++p) {
    idcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  }
  RankMetrics m;
  m.ndcg = dcg / idcg;
  m.recall = static_cast<double>(hits) / static_cast<double>(rel.size());
  m.hit = hits > 0 ? 1.0 : 0.0;
  m.precision = static_cast<double>(hits) / static_cast<double>(k);
  return m;
}

EvalSet EvalSet::from_split(const Split& split, const EngagementIndex& train_index) {
  auto to_indices = [&train_index](const std::vector<Engagement>& list) {
    std::vector<std::uint32_t> out;
    for (const auto& e : list) {
      const auto g = train_index.game_index(e.game);
      if (!g) throw std::invalid_argument(fmt::format("held-out game {} not in catalog", e.game));
      out.push_back(*g);
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  EvalSet set;
  for (const UserId id : split.eval_users) {
    const auto u = train_index.user_index(id);
    if (!u) throw std::invalid_argument(fmt::format("eval user {} has no training data", id));
    EvalUser eu;
    eu.user = *u;
    const auto g = train_index.games_of(*u);
    eu.train.assign(g.begin(), g.end());
    if (auto it = split.validation.find(id); it != split.validation.end()) {
      eu.validation = to_indices(it->second);
    }
    if (auto it = split.test.find(id); it != split.test.end()) eu.test = to_indices(it->second);
    set.users.push_back(std::move(eu));
  }
  return set;
}

MetricsReport evaluate(const Recommender& rec, const EvalSet& eval, Phase phase, int threads) {
  const std::size_t n = eval.users.size();
  const std::size_t max_k = kCutoffs.back();
  std::vector<std::array<RankMetrics, kCutoffs.size()>> per_user(n);
  std::vector<char> counted(n, 0);
  parallel_for(n, threads, [&](std::size_t idx) {
    const auto& eu = eval.users[idx];
    const auto& relevant = phase == Phase::kValidation ? eu.validation : eu.test;
    if (relevant.empty()) return;
    std::vector<std::uint32_t> exclude = eu.train;
    if (phase == Phase::kTest) {
      exclude.insert(exclude.end(), eu.validation.begin(), eu.validation.end());
      std::sort(exclude.begin(), exclude.end());
    }
    const auto ranked = rank_for_user(rec, eu.user, exclude, max_k);
    for (std::size_t c = 0; c < kCutoffs.size(); ++c) {
      const std::size_t k = kCutoffs[c];
      per_user[idx][c] = rank_metrics(
          std::span<const std::uint32_t>(ranked.data(), std::min(k, ranked.size())), relevant, k);
    }
    counted[idx] = 1;
  });

  MetricsReport report;
  for (std::size_t c = 0; c < kCutoffs.size(); ++c) report.cutoffs.push_back({kCutoffs[c]});
  for (std::size_t idx = 0; idx < n; ++idx) {
    if (!counted[idx]) {
      ++report.skipped;
      continue;
    }
    ++report.users;
    for (std::size_t c = 0; c < kCutoffs.size(); ++c) {
      report.cutoffs[c].ndcg += per_user[idx][c].ndcg;
      report.cutoffs[c].recall += per_user[idx][c].recall;
      report.cutoffs[c].hit_ratio += per_user[idx][c].hit;
      report.cutoffs[c].precision += per_user[idx][c].precision;
    }
  }
  if (report.users > 0) {
    const auto denom = static_cast<double>(report.users);
    for (auto& c : report.cutoffs) {
      c.ndcg /= denom;
      c.recall /= denom;
      c.hit_ratio /= denom;
      c.precision /= denom;
    }
  }
  return report;
}

PopularityRecommender::PopularityRecommender(const EngagementIndex& train, PopularityMode mode)
    : mode_(mode), scores_(train.num_games(), 0.0) {
  for (std::uint32_t g = 0; g < train.num_games(); ++g) {
    if (mode == PopularityMode::kCount) {
      scores_[g] = static_cast<double>(train.users_of(g).size());
    } else {
      const auto m = train.game_minutes(g);
      scores_[g] = std::accumulate(m.begin(), m.end(), 0.0);
    }
  }
}

std::string PopularityRecommender::name() const {
  return mode_ == PopularityMode::kCount ? "popularity_count" : "popularity_time";
}

PopularityRecommender popularity_baseline(const EngagementIndex& train, PopularityMode mode) {
  return PopularityRecommender(train, mode);
}

Variant parse_variant(const std::string& label) {
  if (label == "full") return Variant::kFull;
  if (label == "A" || label == "a") return Variant::kA;
  if (label == "B" || label == "b") return Variant::kB;
  if (label == "C" || label == "c") return Variant::kC;
  throw std::invalid_argument(fmt::format("unknown ablation variant '{}'", label));
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kFull: return "scgrec";
    case Variant::kA: return "variant_a";
    case Variant::kB: return "variant_b";
    case Variant::kC: return "variant_c";
  }
  return "unknown";
}

ModelSetup ablation_setup(const ModelSetup& full, Variant variant) {
  ModelSetup out = full;
  const bool drop_social = variant == Variant::kA || variant == Variant::kC;
  const bool drop_context = variant == Variant::kB || variant == Variant::kC;
  if (drop_social) {
    out.options.social_path = false;
    out.weights.social = 0.0;
  }
  if (drop_context) {
    out.options.context_path = false;
    out.weights.context = 0.0;
  }
  out.weights.self = 1.0 - out.weights.social - out.weights.context;
  return out;
}

std::string metrics_csv(const std::vector<NamedReport>& reports) {
  std::string out = "method";
  for (const char* metric : {"ndcg", "recall", "hit_ratio", "precision"}) {
    for (const std::size_t k : kCutoffs) out += fmt::format(",{}@{}", metric, k);
  }
  out += ",users\n";
  for (const auto& [name, r] : reports) {
    out += name;
    for (int m = 0; m < 4; ++m) {
      for (const std::size_t k : kCutoffs) {
        const auto& c = r.at(k);
        const double v = m == 0 ? c.ndcg : m == 1 ? c.recall : m == 2 ? c.hit_ratio : c.precision;
        out += fmt::format(",{:.6f}", v);
      }
    }
    out += fmt::format(",{}\n", r.users);
  }
  return out;
}

std::string metrics_json(const std::vector<NamedReport>& reports) {
  nlohmann::ordered_json root = nlohmann::ordered_json::object();
  for (const auto& [name, r] : reports) {
    nlohmann::ordered_json entry;
    entry["users"] = r.users;
    entry["skipped"] = r.skipped;
    for (const auto& c : r.cutoffs) {
      const std::string at = fmt::format("@{}", c.k);
      entry["ndcg" + at] = c.ndcg;
      entry["recall" + at] = c.recall;
      entry["hit_ratio" + at] = c.hit_ratio;
      entry["precision" + at] = c.precision;
    }
    root[name] = std::move(entry);
  }
  return root.dump(2) + "\n";
}

void write_metrics(const std::vector<NamedReport>& reports, const std::filesystem::path& dir,
                   const std::string& stem) {
  std::filesystem::create_directories(dir);
  std::ofstream(dir / (stem + ".json")) << metrics_json(reports);
  std::ofstream(dir / (stem + ".csv")) << metrics_csv(reports);
}

}  // namespace scgrec
