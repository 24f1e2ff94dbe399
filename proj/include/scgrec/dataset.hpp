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
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "scgrec/common.hpp"

namespace scgrec {

// One (user, game) play record. Minutes are total playtime.
struct Engagement {
  UserId user = 0;
  GameId game = 0;
  double minutes = 0.0;

  friend bool operator==(const Engagement&, const Engagement&) = default;
};

struct GameRecord {
  GameId game = 0;
  std::vector<std::string> genres;  // sorted, unique, non-empty
  std::string developer;
  std::string publisher;

  friend bool operator==(const GameRecord&, const GameRecord&) = default;
};

// Undirected friendship, stored with a < b.
struct SocialEdge {
  UserId a = 0;
  UserId b = 0;

  friend bool operator==(const SocialEdge&, const SocialEdge&) = default;
  friend auto operator<=>(const SocialEdge&, const SocialEdge&) = default;
};

// Canonical form: engagements sorted by (user, game), social sorted, catalog
// sorted by game id. All constructors in this module return canonical data.
struct Dataset {
  std::vector<Engagement> engagements;
  std::vector<SocialEdge> social;
  std::vector<GameRecord> catalog;

  std::vector<UserId> users() const;
  std::size_t num_users() const { return users().size(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct LoadReport {
  std::size_t merged_duplicates = 0;        // (user, game) rows summed
  std::size_t dropped_unknown_game = 0;     // engagement for a game not in catalog
  std::size_t dropped_social_unknown = 0;   // edge touching a user without engagements
  std::size_t dropped_social_invalid = 0;   // self loops and repeated edges
};

struct LoadResult {
  Dataset dataset;
  LoadReport report;
};

LoadResult load_dataset(const std::filesystem::path& engagements_path,
                        const std::filesystem::path& social_path,
                        const std::filesystem::path& catalog_path);

// Writes the three TSV files; read back by load_dataset to an equal Dataset.
void write_dataset(const Dataset& d, const std::filesystem::path& engagements_path,
                   const std::filesystem::path& social_path,
                   const std::filesystem::path& catalog_path);

// Normalizes arbitrary input into canonical form (merging duplicates and
// enforcing referential integrity) and reports what was dropped.
LoadResult canonicalize(std::vector<Engagement> engagements, std::vector<SocialEdge> social,
                        std::vector<GameRecord> catalog);

// Keeps users with >= min_games engagements and total minutes >= min_total_minutes.
// Single pass; the catalog is untouched.
Dataset filter_users(const Dataset& d, std::size_t min_games, double min_total_minutes);

// Uniformly samples floor(fraction * |U|) users without replacement.
Dataset sample_users(const Dataset& d, double fraction, std::uint64_t seed);

// Keeps only the given users (sorted) and the edges among them.
Dataset restrict_to_users(const Dataset& d, const std::vector<UserId>& keep);

struct Split {
  Dataset train;
  std::map<UserId, std::vector<Engagement>> validation;
  std::map<UserId, std::vector<Engagement>> test;
  std::vector<UserId> eval_users;  // sorted
};

Split split_holdout(const Dataset& d, std::size_t num_eval_users, double holdout_fraction,
                    std::uint64_t seed);

// Flat TSV dump of held-out records (same layout as engagements.tsv).
void write_holdout(const std::map<UserId, std::vector<Engagement>>& part,
                   const std::filesystem::path& path);

// Dense CSR view of a Dataset. Users are indexed in ascending id order and
// games in catalog order (ascending id), so index order equals id order.
class EngagementIndex {
 public:
  explicit EngagementIndex(const Dataset& d);

  std::size_t num_users() const { return user_ids_.size(); }
  std::size_t num_games() const { return game_ids_.size(); }

  const std::vector<UserId>& user_ids() const { return user_ids_; }
  const std::vector<GameId>& game_ids() const { return game_ids_; }
  std::optional<std::uint32_t> user_index(UserId id) const;
  std::optional<std::uint32_t> game_index(GameId id) const;

  std::span<const std::uint32_t> games_of(std::uint32_t user) const;
  std::span<const double> minutes_of(std::uint32_t user) const;
  std::span<const std::uint32_t> users_of(std::uint32_t game) const;
  std::span<const double> game_minutes(std::uint32_t game) const;
  std::span<const std::uint32_t> friends_of(std::uint32_t user) const;
  bool engaged(std::uint32_t user, std::uint32_t game) const;

  std::size_t num_engagements() const { return user_games_.size(); }
  std::size_t num_social_edges() const { return friends_.size() / 2; }

 private:
  std::vector<UserId> user_ids_;
  std::vector<GameId> game_ids_;
  std::unordered_map<UserId, std::uint32_t> user_lookup_;
  std::unordered_map<GameId, std::uint32_t> game_lookup_;
  std::vector<std::size_t> user_offsets_;
  std::vector<std::uint32_t> user_games_;  // sorted within each user
  std::vector<double> user_minutes_;
  std::vector<std::size_t> game_offsets_;
  std::vector<std::uint32_t> game_users_;  // sorted within each game
  std::vector<double> game_minutes_;
  std::vector<std::size_t> friend_offsets_;
  std::vector<std::uint32_t> friends_;     // sorted within each user
};

}  // namespace scgrec
