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
#include "scgrec/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include <fmt/core.h>

namespace scgrec {
namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

void write_le(std::ofstream& out, std::span<const double> values) {
  for (double v : values) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char buf[8];
    std::memcpy(buf, &bits, 8);
    out.write(buf, 8);
  }
}

void read_le(std::ifstream& in, std::span<double> values) {
  for (double& v : values) {
    char buf[8];
    if (!in.read(buf, 8)) throw std::runtime_error("checkpoint truncated");
    std::uint64_t bits;
    std::memcpy(&bits, buf, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    v = std::bit_cast<double>(bits);
  }
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const auto& s = ckpt.state;
  nlohmann::ordered_json header;
  header["format"] = "scgrec-checkpoint";
  header["format_version"] = kCheckpointVersion;
  header["dim"] = s.dim();
  header["num_users"] = s.num_users();
  header["num_games"] = s.num_games();
  auto& relations = header["relation_order"] = nlohmann::ordered_json::array();
  for (auto kind : kAllRelations) relations.push_back(relation_name(kind));
  auto& tensors = header["tensors"] = nlohmann::ordered_json::array();
  s.visit([&tensors](std::string_view name, std::span<const double> v) {
    tensors.push_back({{"name", name}, {"size", v.size()}});
  });
  header["hyperparams"] = ckpt.hyperparams;
  header["user_ids"] = ckpt.user_ids;
  header["game_ids"] = ckpt.game_ids;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << header.dump() << '\n';
  s.visit([&out](std::string_view, std::span<const double> v) { write_le(out, v); });
  if (!out) throw std::runtime_error(fmt::format("failed writing {}", path.string()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("checkpoint header missing");
  const auto header = nlohmann::ordered_json::parse(line);
  if (header.value("format", "") != "scgrec-checkpoint" ||
      header.value("format_version", 0) != kCheckpointVersion) {
    throw std::runtime_error(fmt::format("{} is not a version {} checkpoint", path.string(),
                                         kCheckpointVersion));
  }
  Checkpoint ckpt;
  ckpt.state = ModelState::zeros(header.at("num_users").get<std::size_t>(),
                                 header.at("num_games").get<std::size_t>(),
                                 header.at("dim").get<std::size_t>());
  std::size_t t = 0;
  const auto& tensors = header.at("tensors");
  ckpt.state.visit([&](std::string_view name, std::span<double> v) {
    if (t >= tensors.size() || tensors[t].at("name").get<std::string>() != name ||
        tensors[t].at("size").get<std::size_t>() != v.size()) {
      throw std::runtime_error(fmt::format("checkpoint tensor layout mismatch at {}", name));
    }
    read_le(in, v);
    ++t;
  });
  ckpt.hyperparams = header.at("hyperparams");
  ckpt.user_ids = header.at("user_ids").get<std::vector<UserId>>();
  ckpt.game_ids = header.at("game_ids").get<std::vector<GameId>>();
  return ckpt;
}

}  // namespace scgrec
