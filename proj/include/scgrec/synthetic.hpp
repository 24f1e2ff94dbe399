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

#include <cstdint>
#include <filesystem>
#include <vector>

#include "scgrec/dataset.hpp"

namespace scgrec {

// Steam-like generator: long-tailed engagement counts, log-normal playtime,
// genre-driven preferences and homophilous friendships.
struct SynthConfig {
  std::size_t n_users = 5000;
  std::size_t n_games = 300;
  std::size_t n_genres = 8;
  std::size_t n_developers = 60;
  std::size_t n_publishers = 25;
  std::size_t engagements_per_user = 12;  // mean
  double homophily = 0.7;
  double dwell_scale = 1.0;
  std::uint64_t seed = 7;

  void validate() const;
};

// Ground truth kept alongside the generated data.
struct SynthLatents {
  std::vector<std::vector<double>> user_preference;  // n_users x n_genres, Dirichlet
  std::vector<std::vector<std::size_t>> game_genres;  // genre indices per game
  std::vector<double> game_popularity;
  std::vector<double> game_length;  // multiplicative playtime factor
  std::vector<UserId> user_ids;
  std::vector<GameId> game_ids;

  // Unnormalized probability weight of user u (row) engaging game g (row).
  double affinity(std::size_t u, std::size_t g) const;
  // Mean preference of u over g's genres, in [0, 1].
  double genre_match(std::size_t u, std::size_t g) const;
};

struct SynthData {
  Dataset dataset;
  SynthLatents latents;
};

SynthData generate(const SynthConfig& config);

// Game ids ordered by descending true affinity (ties by ascending id).
std::vector<GameId> planted_relevance(const SynthLatents& latents, std::size_t user_row);

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

// Writes engagements.tsv, social.tsv, catalog.tsv and latents.json.
void write_synthetic(const SynthData& data, const SynthConfig& config,
                     const std::filesystem::path& dir);

SynthLatents read_latents(const std::filesystem::path& path);

}  // namespace scgrec
