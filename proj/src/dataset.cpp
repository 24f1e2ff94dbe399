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
#include "scgrec/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string_view>
#include <unordered_set>

#include <fmt/core.h>
#include <fmt/os.h>

namespace scgrec {
namespace {

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::uint64_t parse_id(std::string_view s, const std::string& file, std::size_t line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ParseError(file, line, fmt::format("invalid identifier '{}'", s));
  }
  return v;
}

double parse_minutes(std::string_view s, const std::string& file, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
    throw ParseError(file, line, fmt::format("non-numeric dwelling minutes '{}'", s));
  }
  if (v < 0.0) {
    throw ParseError(file, line, fmt::format("negative dwelling minutes {}", v));
  }
  return v;
}

// Calls fn(fields, line_number) for every non-empty line.
template <typename Fn>
void for_each_row(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fn(split_fields(line, '\t'), number);
  }
}

std::vector<GameRecord> parse_catalog(const std::filesystem::path& path) {
  const std::string file = path.string();
  std::vector<GameRecord> catalog;
  for_each_row(path, [&](const std::vector<std::string_view>& f, std::size_t line) {
    if (f.size() != 4) {
      throw ParseError(file, line, fmt::format("expected 4 fields, got {}", f.size()));
    }
    GameRecord rec;
    rec.game = parse_id(f[0], file, line);
    for (auto g : split_fields(f[1], ',')) {
      if (!g.empty()) rec.genres.emplace_back(g);
    }
    if (rec.genres.empty()) throw ParseError(file, line, "game has no genre");
    rec.developer = std::string(f[2]);
    rec.publisher = std::string(f[3]);
    catalog.push_back(std::move(rec));
  });
  return catalog;
}

}  // namespace

ParseError::ParseError(const std::string& file, std::size_t line, const std::string& what)
    : std::runtime_error(fmt::format("{}:{}: {}", file, line, what)), line_(line) {}

std::vector<UserId> Dataset::users() const {
  std::vector<UserId> out;
  for (const auto& e : engagements) {
    if (out.empty() || out.back() != e.user) out.push_back(e.user);
  }
  return out;
}

LoadResult canonicalize(std::vector<Engagement> engagements, std::vector<SocialEdge> social,
                        std::vector<GameRecord> catalog) {
  LoadResult result;
  auto& report = result.report;

  for (auto& g : catalog) {
    std::sort(g.genres.begin(), g.genres.end());
    g.genres.erase(std::unique(g.genres.begin(), g.genres.end()), g.genres.end());
  }
  std::sort(catalog.begin(), catalog.end(),
            [](const GameRecord& x, const GameRecord& y) { return x.game < y.game; });
  for (std::size_t i = 1; i < catalog.size(); ++i) {
    if (catalog[i].game == catalog[i - 1].game) {
      throw std::invalid_argument(fmt::format("duplicate game id {} in catalog", catalog[i].game));
    }
  }
  std::unordered_set<GameId> known_games;
  for (const auto& g : catalog) known_games.insert(g.game);

  std::stable_sort(engagements.begin(), engagements.end(),
                   [](const Engagement& x, const Engagement& y) {
                     return std::tie(x.user, x.game) < std::tie(y.user, y.game);
                   });
  std::vector<Engagement> merged;
  merged.reserve(engagements.size());
  for (const auto& e : engagements) {
    if (!known_games.contains(e.game)) {
      ++report.dropped_unknown_game;
      continue;
    }
    if (!merged.empty() && merged.back().user == e.user && merged.back().game == e.game) {
      merged.back().minutes += e.minutes;
      ++report.merged_duplicates;
      continue;
    }
    merged.push_back(e);
  }

  std::unordered_set<UserId> known_users;
  for (const auto& e : merged) known_users.insert(e.user);

  for (auto& s : social) {
    if (s.a > s.b) std::swap(s.a, s.b);
  }
  std::sort(social.begin(), social.end());
  std::vector<SocialEdge> edges;
  edges.reserve(social.size());
  for (std::size_t i = 0; i < social.size(); ++i) {
    const auto& s = social[i];
    if (s.a == s.b || (i > 0 && social[i - 1] == s)) {
      ++report.dropped_social_invalid;
      continue;
    }
    if (!known_users.contains(s.a) || !known_users.contains(s.b)) {
      ++report.dropped_social_unknown;
      continue;
    }
    edges.push_back(s);
  }

  result.dataset.engagements = std::move(merged);
  result.dataset.social = std::move(edges);
  result.dataset.catalog = std::move(catalog);
  return result;
}

LoadResult load_dataset(const std::filesystem::path& engagements_path,
                        const std::filesystem::path& social_path,
                        const std::filesystem::path& catalog_path) {
  auto catalog = parse_catalog(catalog_path);

  std::vector<Engagement> engagements;
  {
    const std::string file = engagements_path.string();
    for_each_row(engagements_path, [&](const std::vector<std::string_view>& f, std::size_t line) {
      if (f.size() != 3) {
        throw ParseError(file, line, fmt::format("expected 3 fields, got {}", f.size()));
      }
      engagements.push_back({parse_id(f[0], file, line), parse_id(f[1], file, line),
                             parse_minutes(f[2], file, line)});
    });
  }

  std::vector<SocialEdge> social;
  {
    const std::string file = social_path.string();
    for_each_row(social_path, [&](const std::vector<std::string_view>& f, std::size_t line) {
      if (f.size() != 2) {
        throw ParseError(file, line, fmt::format("expected 2 fields, got {}", f.size()));
      }
      social.push_back({parse_id(f[0], file, line), parse_id(f[1], file, line)});
    });
  }

  return canonicalize(std::move(engagements), std::move(social), std::move(catalog));
}

void write_dataset(const Dataset& d, const std::filesystem::path& engagements_path,
                   const std::filesystem::path& social_path,
                   const std::filesystem::path& catalog_path) {
  {
    auto out = fmt::output_file(engagements_path.string());
    for (const auto& e : d.engagements) out.print("{}\t{}\t{}\n", e.user, e.game, e.minutes);
  }
  {
    auto out = fmt::output_file(social_path.string());
    for (const auto& s : d.social) out.print("{}\t{}\n", s.a, s.b);
  }
  {
    auto out = fmt::output_file(catalog_path.string());
    for (const auto& g : d.catalog) {
      std::string genres;
      for (std::size_t k = 0; k < g.genres.size(); ++k) {
        if (k) genres += ',';
        genres += g.genres[k];
      }
      out.print("{}\t{}\t{}\t{}\n", g.game, genres, g.developer, g.publisher);
    }
  }
}

Dataset restrict_to_users(const Dataset& d, const std::vector<UserId>& keep) {
  auto kept = [&keep](UserId u) { return std::binary_search(keep.begin(), keep.end(), u); };
  Dataset out;
  out.catalog = d.catalog;
  for (const auto& e : d.engagements) {
    if (kept(e.user)) out.engagements.push_back(e);
  }
  for (const auto& s : d.social) {
    if (kept(s.a) && kept(s.b)) out.social.push_back(s);
  }
  return out;
}

Dataset filter_users(const Dataset& d, std::size_t min_games, double min_total_minutes) {
  if (min_games < 1) throw std::invalid_argument("min_games must be >= 1");
  if (!(min_total_minutes >= 0.0)) throw std::invalid_argument("min_total_minutes must be >= 0");
  std::vector<UserId> keep;
  std::size_t i = 0;
  while (i < d.engagements.size()) {
    const UserId u = d.engagements[i].user;
    std::size_t count = 0;
    double total = 0.0;
    for (; i < d.engagements.size() && d.engagements[i].user == u; ++i) {
      ++count;
      total += d.engagements[i].minutes;
    }
    if (count >= min_games && total >= min_total_minutes) keep.push_back(u);
  }
  return restrict_to_users(d, keep);
}

Dataset sample_users(const Dataset& d, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument(fmt::format("sample fraction {} outside (0, 1]", fraction));
  }
  auto users = d.users();
  const auto take = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(users.size())));
  if (take == users.size()) return d;
  Rng rng(seed);
  std::shuffle(users.begin(), users.end(), rng);
  users.resize(take);
  std::sort(users.begin(), users.end());
  return restrict_to_users(d, users);
}

Split split_holdout(const Dataset& d, std::size_t num_eval_users, double holdout_fraction,
                    std::uint64_t seed) {
  if (!(holdout_fraction > 0.0 && holdout_fraction < 0.5)) {
    throw std::invalid_argument(
        fmt::format("holdout fraction {} outside (0, 0.5)", holdout_fraction));
  }
  auto users = d.users();
  if (num_eval_users > users.size()) {
    throw std::invalid_argument(fmt::format("requested {} evaluation users but only {} exist",
                                            num_eval_users, users.size()));
  }

  // Per-user ranges in the canonical engagement order.
  std::unordered_map<UserId, std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t i = 0; i < d.engagements.size();) {
    std::size_t j = i;
    while (j < d.engagements.size() && d.engagements[j].user == d.engagements[i].user) ++j;
    ranges[d.engagements[i].user] = {i, j};
    i = j;
  }

  Rng rng(seed);
  std::shuffle(users.begin(), users.end(), rng);

  Split split;
  std::unordered_set<std::size_t> held_out;  // engagement positions
  for (std::size_t k = 0; k < users.size() && split.eval_users.size() < num_eval_users; ++k) {
    const UserId u = users[k];
    const auto [begin, end] = ranges.at(u);
    const std::size_t n = end - begin;
    if (n < 3) continue;  // cannot give one record to each partition
    auto h = static_cast<std::size_t>(std::ceil(holdout_fraction * static_cast<double>(n) - 1e-9));
    h = std::clamp<std::size_t>(h, 1, (n - 1) / 2);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), begin);
    std::shuffle(order.begin(), order.end(), rng);
    auto& val = split.validation[u];
    auto& tst = split.test[u];
    for (std::size_t m = 0; m < h; ++m) {
      val.push_back(d.engagements[order[m]]);
      tst.push_back(d.engagements[order[h + m]]);
      held_out.insert(order[m]);
      held_out.insert(order[h + m]);
    }
    auto by_game = [](const Engagement& x, const Engagement& y) { return x.game < y.game; };
    std::sort(val.begin(), val.end(), by_game);
    std::sort(tst.begin(), tst.end(), by_game);
    split.eval_users.push_back(u);
  }
  if (split.eval_users.size() < num_eval_users) {
    throw std::runtime_error(fmt::format(
        "only {} users have >= 3 engagements; cannot draw {} evaluation users",
        split.eval_users.size(), num_eval_users));
  }
  std::sort(split.eval_users.begin(), split.eval_users.end());

  split.train.catalog = d.catalog;
  split.train.social = d.social;
  split.train.engagements.reserve(d.engagements.size() - held_out.size());
  for (std::size_t i = 0; i < d.engagements.size(); ++i) {
    if (!held_out.contains(i)) split.train.engagements.push_back(d.engagements[i]);
  }
  return split;
}

void write_holdout(const std::map<UserId, std::vector<Engagement>>& part,
                   const std::filesystem::path& path) {
  auto out = fmt::output_file(path.string());
  for (const auto& [u, list] : part) {
    for (const auto& e : list) out.print("{}\t{}\t{}\n", e.user, e.game, e.minutes);
  }
}

EngagementIndex::EngagementIndex(const Dataset& d) {
  user_ids_ = d.users();
  game_ids_.reserve(d.catalog.size());
  for (const auto& g : d.catalog) game_ids_.push_back(g.game);
  for (std::uint32_t i = 0; i < user_ids_.size(); ++i) user_lookup_.emplace(user_ids_[i], i);
  for (std::uint32_t i = 0; i < game_ids_.size(); ++i) game_lookup_.emplace(game_ids_[i], i);

  const std::size_t nu = user_ids_.size();
  const std::size_t ng = game_ids_.size();
  user_offsets_.assign(nu + 1, 0);
  game_offsets_.assign(ng + 1, 0);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;  // (user, game)
  pairs.reserve(d.engagements.size());
  for (const auto& e : d.engagements) {
    const auto it = game_lookup_.find(e.game);
    if (it == game_lookup_.end()) {
      throw std::invalid_argument(fmt::format("engagement references unknown game {}", e.game));
    }
    const std::uint32_t u = user_lookup_.at(e.user);
    pairs.emplace_back(u, it->second);
    ++user_offsets_[u + 1];
    ++game_offsets_[it->second + 1];
  }
  std::partial_sum(user_offsets_.begin(), user_offsets_.end(), user_offsets_.begin());
  std::partial_sum(game_offsets_.begin(), game_offsets_.end(), game_offsets_.begin());

  user_games_.resize(pairs.size());
  user_minutes_.resize(pairs.size());
  game_users_.resize(pairs.size());
  game_minutes_.resize(pairs.size());
  // Engagements are sorted by (user, game id) and game index follows game id,
  // so user rows come out sorted; filling game rows in user order sorts them too.
  std::vector<std::size_t> ucur(user_offsets_.begin(), user_offsets_.end() - 1);
  std::vector<std::size_t> gcur(game_offsets_.begin(), game_offsets_.end() - 1);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [u, g] = pairs[k];
    const double m = d.engagements[k].minutes;
    user_games_[ucur[u]] = g;
    user_minutes_[ucur[u]++] = m;
    game_users_[gcur[g]] = u;
    game_minutes_[gcur[g]++] = m;
  }

  friend_offsets_.assign(nu + 1, 0);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> links;
  links.reserve(d.social.size() * 2);
  for (const auto& s : d.social) {
    const auto a = user_lookup_.find(s.a);
    const auto b = user_lookup_.find(s.b);
    if (a == user_lookup_.end() || b == user_lookup_.end() || s.a == s.b) continue;
    links.emplace_back(a->second, b->second);
    links.emplace_back(b->second, a->second);
  }
  std::sort(links.begin(), links.end());
  links.erase(std::unique(links.begin(), links.end()), links.end());
  for (const auto& [a, b] : links) ++friend_offsets_[a + 1];
  std::partial_sum(friend_offsets_.begin(), friend_offsets_.end(), friend_offsets_.begin());
  friends_.reserve(links.size());
  for (const auto& [a, b] : links) friends_.push_back(b);
}

std::optional<std::uint32_t> EngagementIndex::user_index(UserId id) const {
  const auto it = user_lookup_.find(id);
  if (it == user_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> EngagementIndex::game_index(GameId id) const {
  const auto it = game_lookup_.find(id);
  if (it == game_lookup_.end()) return std::nullopt;
  return it->second;
}

std::span<const std::uint32_t> EngagementIndex::games_of(std::uint32_t user) const {
  return {user_games_.data() + user_offsets_[user], user_offsets_[user + 1] - user_offsets_[user]};
}

std::span<const double> EngagementIndex::minutes_of(std::uint32_t user) const {
  return {user_minutes_.data() + user_offsets_[user],
          user_offsets_[user + 1] - user_offsets_[user]};
}

std::span<const std::uint32_t> EngagementIndex::users_of(std::uint32_t game) const {
  return {game_users_.data() + game_offsets_[game], game_offsets_[game + 1] - game_offsets_[game]};
}

std::span<const double> EngagementIndex::game_minutes(std::uint32_t game) const {
  return {game_minutes_.data() + game_offsets_[game],
          game_offsets_[game + 1] - game_offsets_[game]};
}

std::span<const std::uint32_t> EngagementIndex::friends_of(std::uint32_t user) const {
  return {friends_.data() + friend_offsets_[user], friend_offsets_[user + 1] - friend_offsets_[user]};
}

bool EngagementIndex::engaged(std::uint32_t user, std::uint32_t game) const {
  const auto g = games_of(user);
  return std::binary_search(g.begin(), g.end(), game);
}

}  // namespace scgrec
