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
#include "scgrec/pipeline.hpp"

#include <stdexcept>

namespace scgrec {
namespace {

enum Stream : std::uint64_t { kSample = 11, kSplit = 12 };

}  // namespace

void PrepareConfig::validate() const {
  if (min_games < 1) throw std::invalid_argument("min_games must be >= 1");
  if (!(min_total_minutes >= 0.0)) throw std::invalid_argument("min_total_minutes must be >= 0");
  if (!(sample_fraction > 0.0 && sample_fraction <= 1.0)) {
    throw std::invalid_argument("sample_fraction must lie in (0, 1]");
  }
  if (!(holdout_fraction > 0.0 && holdout_fraction < 0.5)) {
    throw std::invalid_argument("holdout_fraction must lie in (0, 0.5)");
  }
  if (!(thresholds.tau_p >= 0.0)) throw std::invalid_argument("tau_p must be >= 0");
  if (!(thresholds.tau_t >= 0.0)) throw std::invalid_argument("tau_t must be >= 0");
  if (thresholds.T && !(*thresholds.T > 0.0)) throw std::invalid_argument("T must be > 0");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

std::unique_ptr<Prepared> prepare(const Dataset& raw, const PrepareConfig& config) {
  config.validate();
  auto p = std::make_unique<Prepared>();
  p->data = filter_users(raw, config.min_games, config.min_total_minutes);
  if (config.sample_fraction < 1.0) {
    p->data = sample_users(p->data, config.sample_fraction, derive_seed(config.seed, kSample));
  }
  p->split = split_holdout(p->data, config.eval_users, config.holdout_fraction,
                           derive_seed(config.seed, kSplit));
  p->train_index = std::make_unique<EngagementIndex>(p->split.train);
  auto built = build_context_graph(p->split.train, *p->train_index, config.thresholds,
                                   config.threads);
  p->graph = std::make_unique<ContextGraph>(std::move(built.graph));
  p->dwelling_T = built.T;
  p->ctx = std::make_unique<ForwardContext>(*p->train_index, *p->graph);
  p->eval = EvalSet::from_split(p->split, *p->train_index);
  return p;
}

VariantRun run_variant(const Prepared& p, const Hyperparams& hp, Variant variant,
                       const std::function<void(const EpochLog&)>& on_epoch) {
  Hyperparams h = hp;
  h.setup = ablation_setup(hp.setup, variant);
  VariantRun run;
  run.name = variant_name(variant);
  run.result = train(*p.train_index, *p.ctx, p.eval, h, on_epoch);
  const ScgrecRecommender rec(run.name, run.result.state, *p.ctx, h.setup.options,
                              h.setup.weights, h.threads);
  run.validation = evaluate(rec, p.eval, Phase::kValidation, h.threads);
  run.test = evaluate(rec, p.eval, Phase::kTest, h.threads);
  return run;
}

std::vector<NamedReport> baseline_reports(const Prepared& p, int threads) {
  std::vector<NamedReport> out;
  for (auto mode : {PopularityMode::kCount, PopularityMode::kTime}) {
    const auto rec = popularity_baseline(*p.train_index, mode);
    out.emplace_back(rec.name(), evaluate(rec, p.eval, Phase::kTest, threads));
  }
  return out;
}

}  // namespace scgrec
