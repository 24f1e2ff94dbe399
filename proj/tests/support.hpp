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

#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include "scgrec/context_graph.hpp"
#include "scgrec/dataset.hpp"
#include "scgrec/model.hpp"
#include "scgrec/training.hpp"

namespace scgrec::testing {

// 5 users, 8 games. User 5 has no friends; every relation has edges.
inline Dataset toy_dataset() {
  std::vector<GameRecord> catalog = {
      {1, {"action"}, "valve", "valve"},
      {2, {"action", "rpg"}, "valve", "ea"},
      {3, {"rpg"}, "bethesda", "ea"},
      {4, {"strategy"}, "bethesda", "bethesda"},
      {5, {"strategy", "action"}, "paradox", "paradox"},
      {6, {"puzzle"}, "paradox", "valve"},
      {7, {"rpg", "puzzle"}, "indie", "indie"},
      {8, {"sports"}, "indie", "ea"},
  };
  std::vector<Engagement> eng = {
      {1, 1, 120}, {1, 2, 300}, {1, 3, 45},  {1, 6, 10},
      {2, 1, 100}, {2, 2, 280}, {2, 4, 600}, {2, 7, 30},
      {3, 3, 60},  {3, 4, 500}, {3, 5, 90},  {3, 8, 15},
      {4, 2, 200}, {4, 5, 80},  {4, 6, 20},  {4, 7, 35},
      {5, 1, 150}, {5, 3, 50},  {5, 8, 25},
  };
  std::vector<SocialEdge> social = {{1, 2}, {1, 3}, {2, 4}, {3, 4}};
  return canonicalize(std::move(eng), std::move(social), std::move(catalog)).dataset;
}

struct ToyInstance {
  Dataset data;
  std::unique_ptr<EngagementIndex> index;
  std::unique_ptr<ContextGraph> graph;
  std::unique_ptr<ForwardContext> ctx;
};

inline std::unique_ptr<ToyInstance> toy_instance() {
  auto t = std::make_unique<ToyInstance>();
  t->data = toy_dataset();
  t->index = std::make_unique<EngagementIndex>(t->data);
  GraphThresholds th;
  th.tau_p = 0.01;
  th.tau_t = 0.2;
  th.T = 100.0;
  t->graph = std::make_unique<ContextGraph>(build_context_graph(t->data, *t->index, th).graph);
  t->ctx = std::make_unique<ForwardContext>(*t->index, *t->graph);
  return t;
}

// Random parameters including non-zero biases.
inline ModelState random_state(std::size_t nu, std::size_t ng, std::size_t d,
                               std::uint64_t seed) {
  ModelState s = ModelState::random(nu, ng, d, seed);
  Rng rng(seed + 99);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (auto& b : s.conv_bias) {
    for (Eigen::Index k = 0; k < b.size(); ++k) b[k] = u(rng);
  }
  return s;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("scgrec_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace scgrec::testing
