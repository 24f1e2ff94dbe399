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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scgrec/dataset.hpp"

namespace scgrec {

struct Histogram {
  std::vector<double> bin_edges;      // ascending, size = counts + 1
  std::vector<std::uint64_t> counts;

  std::uint64_t total() const;
  // Bin containing x (last bin closed on the right); nullopt when outside.
  std::optional<std::size_t> bin_of(double x) const;
};

struct GenreMatrix {
  std::vector<std::string> genres;
  // values[a * n + b] = P(A | B); nullopt when no user engaged in B.
  std::vector<std::optional<double>> values;

  std::optional<double> at(std::size_t a, std::size_t b) const {
    return values[a * genres.size() + b];
  }
};

// First: users per engaged-game count (unit bins from 0). Second: engagement
// records per ln(minutes), width 0.5 from 0; values below 0 go to bin 0.
std::pair<Histogram, Histogram> engagement_histograms(const Dataset& d);

GenreMatrix genre_conditional(const Dataset& d, const std::vector<std::string>& genres);

// Genre labels ordered by number of engaged users (ties by label).
std::vector<std::string> genres_by_popularity(const Dataset& d);

// Shared users over the sum of audience sizes; 0 when both are unplayed.
double co_purchase_score(const EngagementIndex& index, GameId i, GameId j);
double co_purchase_score(const Dataset& d, GameId i, GameId j);

// exp(-|t_i - t_j| / T) with mean minutes over the common users; nullopt
// without a common user.
std::optional<double> co_dwelling_score(const EngagementIndex& index, GameId i, GameId j, double T);
std::optional<double> co_dwelling_score(const Dataset& d, GameId i, GameId j, double T);

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y);

struct SocialCorrelation {
  std::optional<double> friend_r;
  std::optional<double> random_r;
  std::size_t pairs = 0;
};

// Pearson r between a user's minutes on `game` and the mean over friends who
// played it, against equally sized random samples of non-friend players.
SocialCorrelation social_dwelling_correlation(const EngagementIndex& index, GameId game,
                                              std::uint64_t seed);
SocialCorrelation social_dwelling_correlation(const Dataset& d, GameId game, std::uint64_t seed);

// Per-user ln(1 + minutes) vectors over the top-k genres, cosine for every
// friend edge and for as many random non-friend pairs, 10 bins over [0, 1].
struct SimilarityHistograms {
  Histogram friends;
  Histogram non_friends;
  double friends_mean = 0.0;
  double non_friends_mean = 0.0;
};
SimilarityHistograms genre_similarity_histogram(const Dataset& d, std::size_t top_k_genres,
                                                std::uint64_t seed);

double cosine(const std::vector<double>& a, const std::vector<double>& b);

// Users per social degree, including degree 0.
Histogram friend_count_distribution(const Dataset& d);

struct AnalysisOptions {
  std::size_t top_genres = 5;
  std::size_t top_games = 10;
  double dwell_T = 0.0;  // <= 0 uses the mean pairwise gap
  std::uint64_t seed = 1;
};

// Writes every report as CSV plus analysis_summary.json.
void write_analysis(const Dataset& d, const AnalysisOptions& options,
                    const std::filesystem::path& dir);

}  // namespace scgrec
