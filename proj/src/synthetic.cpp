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
#include "scgrec/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

namespace scgrec {
namespace {

constexpr double kDirichletConcentration = 0.3;
constexpr double kSecondGenreProb = 0.4;
constexpr double kDeveloperGenreProb = 0.7;
constexpr double kDeveloperPublisherProb = 0.8;
constexpr double kBaseAffinity = 0.01;
constexpr double kMinEngagements = 3.0;
constexpr double kMeanFriendProposals = 2.0;
constexpr std::size_t kNearestUsers = 10;
constexpr double kLogMinutesBase = 4.8;  // ~2 hours
constexpr double kLogMinutesSigma = 1.0;

// Streams for derive_seed.
enum Stream : std::uint64_t { kGames = 1, kUsers = 1000, kEngage = 1u << 24, kSocial = 1u << 25 };

}  // namespace

void SynthConfig::validate() const {
  if (n_users < 2 || n_games < 2 || n_genres < 1 || n_developers < 1 || n_publishers < 1 ||
      engagements_per_user < 1) {
    throw std::invalid_argument("synthetic counts must be >= 1 (users and games >= 2)");
  }
  if (!(homophily >= 0.0 && homophily <= 1.0)) {
    throw std::invalid_argument("homophily must lie in [0, 1]");
  }
  if (!(dwell_scale >= 0.0)) throw std::invalid_argument("dwell_scale must be >= 0");
}

double SynthLatents::genre_match(std::size_t u, std::size_t g) const {
  double total = 0.0;
  for (const auto k : game_genres[g]) total += user_preference[u][k];
  return total / static_cast<double>(game_genres[g].size());
}

double SynthLatents::affinity(std::size_t u, std::size_t g) const {
  return game_popularity[g] * (genre_match(u, g) + kBaseAffinity);
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

SynthData generate(const SynthConfig& config) {
  config.validate();
  const std::size_t nu = config.n_users;
  const std::size_t ng = config.n_games;
  const std::size_t nk = config.n_genres;
  SynthData out;
  SynthLatents& lat = out.latents;

  // Games: developers have a home genre and a home publisher.
  {
    Rng rng(derive_seed(config.seed, kGames));
    std::uniform_int_distribution<std::size_t> genre(0, nk - 1);
    std::uniform_int_distribution<std::size_t> dev(0, config.n_developers - 1);
    std::uniform_int_distribution<std::size_t> pub(0, config.n_publishers - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::lognormal_distribution<double> popularity(0.0, 0.5);
    std::lognormal_distribution<double> length(0.0, 0.8);
    std::vector<std::size_t> dev_genre(config.n_developers);
    std::vector<std::size_t> dev_pub(config.n_developers);
    for (std::size_t k = 0; k < config.n_developers; ++k) {
      dev_genre[k] = genre(rng);
      dev_pub[k] = pub(rng);
    }
    lat.game_genres.resize(ng);
    for (std::size_t g = 0; g < ng; ++g) {
      const std::size_t developer = dev(rng);
      const std::size_t primary = unit(rng) < kDeveloperGenreProb ? dev_genre[developer] : genre(rng);
      auto& genres = lat.game_genres[g];
      genres.push_back(primary);
      if (nk > 1 && unit(rng) < kSecondGenreProb) {
        std::size_t second = genre(rng);
        while (second == primary) second = genre(rng);
        genres.push_back(second);
      }
      std::sort(genres.begin(), genres.end());
      const std::size_t publisher = unit(rng) < kDeveloperPublisherProb ? dev_pub[developer] : pub(rng);
      lat.game_popularity.push_back(popularity(rng));
      lat.game_length.push_back(length(rng));
      lat.game_ids.push_back(g + 1);

      GameRecord rec;
      rec.game = g + 1;
      for (const auto k : genres) rec.genres.push_back(fmt::format("genre_{:02}", k));
      rec.developer = fmt::format("dev_{:03}", developer);
      rec.publisher = fmt::format("pub_{:03}", publisher);
      out.dataset.catalog.push_back(std::move(rec));
    }
  }

  // User preferences: Dirichlet via normalized gammas.
  lat.user_preference.assign(nu, std::vector<double>(nk, 0.0));
  for (std::size_t u = 0; u < nu; ++u) {
    Rng rng(derive_seed(config.seed, kUsers + u));
    std::gamma_distribution<double> gamma(kDirichletConcentration, 1.0);
    auto& p = lat.user_preference[u];
    double total = 0.0;
    for (auto& x : p) total += (x = gamma(rng));
    if (total <= 0.0) {
      std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(nk));
    } else {
      for (auto& x : p) x /= total;
    }
    lat.user_ids.push_back(u + 1);
  }

  // Engagements: long-tailed counts, affinity-weighted sampling without
  // replacement (exponential keys), log-normal minutes shifted by genre match.
  std::vector<Engagement> engagements;
  {
    const double extra_mean =
        std::max(0.0, static_cast<double>(config.engagements_per_user) - kMinEngagements);
    for (std::size_t u = 0; u < nu; ++u) {
      Rng rng(derive_seed(config.seed, kEngage + u));
      std::size_t count = config.engagements_per_user;
      if (extra_mean > 0.0) {
        std::geometric_distribution<std::size_t> extra(1.0 / (extra_mean + 1.0));
        count = static_cast<std::size_t>(kMinEngagements) + extra(rng);
      }
      count = std::min(count, ng - 1);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::normal_distribution<double> noise(0.0, kLogMinutesSigma);
      std::vector<std::pair<double, std::size_t>> keys(ng);
      for (std::size_t g = 0; g < ng; ++g) {
        const double r = std::max(unit(rng), 1e-300);
        keys[g] = {std::log(r) / lat.affinity(u, g), g};
      }
      std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(count), keys.end(),
                        [](const auto& a, const auto& b) { return a.first > b.first; });
      for (std::size_t k = 0; k < count; ++k) {
        const std::size_t g = keys[k].second;
        const double log_minutes = kLogMinutesBase + std::log(lat.game_length[g]) +
                                   2.0 * config.dwell_scale * lat.genre_match(u, g) + noise(rng);
        engagements.push_back({u + 1, g + 1, std::round(std::exp(log_minutes))});
      }
    }
  }

  // Social: each user proposes a geometric number of friendships, homophilous
  // ones going to one of its nearest users by preference cosine.
  std::vector<SocialEdge> social;
  {
    for (std::size_t u = 0; u < nu; ++u) {
      Rng rng(derive_seed(config.seed, kSocial + u));
      std::geometric_distribution<std::size_t> proposals(1.0 / (kMeanFriendProposals + 1.0));
      const std::size_t m = proposals(rng);
      if (m == 0) continue;
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::uniform_int_distribution<std::size_t> any(0, nu - 1);
      std::vector<std::size_t> nearest;
      for (std::size_t r = 0; r < m; ++r) {
        std::size_t v = u;
        if (unit(rng) < config.homophily) {
          if (nearest.empty()) {
            std::vector<std::pair<double, std::size_t>> sims;
            sims.reserve(nu - 1);
            for (std::size_t w = 0; w < nu; ++w) {
              if (w != u) {
                sims.emplace_back(cosine_similarity(lat.user_preference[u], lat.user_preference[w]), w);
              }
            }
            const std::size_t k = std::min(kNearestUsers, sims.size());
            std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(k), sims.end(),
                              [](const auto& a, const auto& b) {
                                return a.first != b.first ? a.first > b.first : a.second < b.second;
                              });
            for (std::size_t i = 0; i < k; ++i) nearest.push_back(sims[i].second);
          }
          std::uniform_int_distribution<std::size_t> pick(0, nearest.size() - 1);
          v = nearest[pick(rng)];
        } else {
          while (v == u) v = any(rng);
        }
        social.push_back({u + 1, v + 1});
      }
    }
  }

  auto canonical = canonicalize(std::move(engagements), std::move(social),
                                std::move(out.dataset.catalog));
  out.dataset = std::move(canonical.dataset);
  return out;
}

std::vector<GameId> planted_relevance(const SynthLatents& latents, std::size_t user_row) {
  const std::size_t ng = latents.game_ids.size();
  std::vector<std::size_t> order(ng);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> a(ng);
  for (std::size_t g = 0; g < ng; ++g) a[g] = latents.affinity(user_row, g);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (a[x] != a[y]) return a[x] > a[y];
    return latents.game_ids[x] < latents.game_ids[y];
  });
  std::vector<GameId> out;
  out.reserve(ng);
  for (const auto g : order) out.push_back(latents.game_ids[g]);
  return out;
}

void write_synthetic(const SynthData& data, const SynthConfig& config,
                     const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_dataset(data.dataset, dir / "engagements.tsv", dir / "social.tsv", dir / "catalog.tsv");
  nlohmann::ordered_json j;
  j["config"] = {{"n_users", config.n_users},
                 {"n_games", config.n_games},
                 {"n_genres", config.n_genres},
                 {"n_developers", config.n_developers},
                 {"n_publishers", config.n_publishers},
                 {"engagements_per_user", config.engagements_per_user},
                 {"homophily", config.homophily},
                 {"dwell_scale", config.dwell_scale},
                 {"seed", config.seed}};
  j["user_ids"] = data.latents.user_ids;
  j["game_ids"] = data.latents.game_ids;
  j["user_preference"] = data.latents.user_preference;
  j["game_genres"] = data.latents.game_genres;
  j["game_popularity"] = data.latents.game_popularity;
  j["game_length"] = data.latents.game_length;
  std::ofstream(dir / "latents.json") << j.dump() << '\n';
}

SynthLatents read_latents(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  const auto j = nlohmann::json::parse(in);
  SynthLatents lat;
  lat.user_ids = j.at("user_ids").get<std::vector<UserId>>();
  lat.game_ids = j.at("game_ids").get<std::vector<GameId>>();
  lat.user_preference = j.at("user_preference").get<std::vector<std::vector<double>>>();
  lat.game_genres = j.at("game_genres").get<std::vector<std::vector<std::size_t>>>();
  lat.game_popularity = j.at("game_popularity").get<std::vector<double>>();
  lat.game_length = j.at("game_length").get<std::vector<double>>();
  return lat;
}

}  // namespace scgrec
