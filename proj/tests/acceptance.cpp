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
// Acceptance checks, one PASS/FAIL/SKIP line per criterion. Exit status is
// non-zero when any criterion fails.
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <set>

#include <fmt/core.h>

#include "scgrec/pipeline.hpp"
#include "scgrec/synthetic.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace scgrec {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, const std::string& title, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  fmt::print("{} [{}] {}: {}\n", ok ? "PASS" : "FAIL", id, title, detail);
  std::fflush(stdout);
}

// 1. Central differences of the summed objective against the analytic gradient.
void gradient_criterion() {
  const auto t0 = Clock::now();
  auto toy = testing::toy_instance();
  bool populated = true;
  for (auto kind : kAllRelations) populated &= toy->graph->num_edges(kind) > 0;
  bool friendless = false;
  for (std::uint32_t u = 0; u < toy->ctx->num_users(); ++u) friendless |= toy->ctx->friends(u).empty();

  const auto triplets = sample_triplets(*toy->index, 5).triplets;
  const double lambda = 1e-4, h = 1e-4;
  std::size_t checked = 0, bad = 0;
  double worst = 0.0;
  for (auto variant : {Variant::kFull, Variant::kA, Variant::kB, Variant::kC}) {
    for (auto norm : {Normalization::kMean, Normalization::kSymmetric}) {
      ModelSetup setup;
      setup.options.normalization = norm;
      setup = ablation_setup(setup, variant);
      ModelState state = testing::random_state(5, 8, 4, 31);
      ModelState grad;
      gradients(state, *toy->ctx, setup, triplets, lambda, grad);
      std::vector<double> analytic;
      grad.visit([&](std::string_view, std::span<const double> v) {
        analytic.insert(analytic.end(), v.begin(), v.end());
      });
      std::vector<double*> slots;
      state.visit([&](std::string_view, std::span<double> v) {
        for (double& x : v) slots.push_back(&x);
      });
      for (std::size_t k = 0; k < slots.size(); ++k) {
        const double keep = *slots[k];
        *slots[k] = keep + h;
        const double up = bpr_loss(state, *toy->ctx, setup, triplets, lambda);
        *slots[k] = keep - h;
        const double down = bpr_loss(state, *toy->ctx, setup, triplets, lambda);
        *slots[k] = keep;
        const double numeric = (up - down) / (2 * h);
        const double a = analytic[k];
        const double scale = std::max(std::abs(a), std::abs(numeric));
        bool ok;
        if (scale < 1e-6) {
          ok = std::abs(a - numeric) < 1e-8;
        } else {
          const double rel = std::abs(a - numeric) / scale;
          worst = std::max(worst, rel);
          ok = rel < 1e-4;
        }
        ++checked;
        bad += !ok;
      }
    }
  }
  const double secs = seconds_since(t0);
  report(1, "gradient check", populated && friendless && bad == 0 && secs < 10.0,
         fmt::format("{} entries over 4 variants x 2 normalizations, {} outside tolerance, "
                     "max rel err {:.2e}, relations populated={}, friendless user={}, {:.2f}s",
                     checked, bad, worst, populated, friendless, secs));
}

// 2. rank_metrics against a definition-level recomputation.
void metric_criterion() {
  Rng rng(20260101);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 50)(rng);
    std::vector<std::uint32_t> games(n);
    std::iota(games.begin(), games.end(), 0u);
    std::shuffle(games.begin(), games.end(), rng);
    const std::vector<std::uint32_t> ranked = games;
    std::shuffle(games.begin(), games.end(), rng);
    const std::size_t nrel = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(10, n))(rng);
    const std::set<std::uint32_t> rel(games.begin(), games.begin() + nrel);
    const std::vector<std::uint32_t> rel_list(rel.begin(), rel.end());
    for (const std::size_t k : kCutoffs) {
      const auto got = rank_metrics(ranked, rel_list, k);
      const auto want = oracle::brute_metrics(ranked, rel, k);
      for (double d : {got.ndcg - want.ndcg, got.recall - want.recall, got.hit - want.hit,
                       got.precision - want.precision}) {
        worst = std::max(worst, std::abs(d));
      }
    }
  }
  report(2, "metric oracle", worst <= 1e-12,
         fmt::format("100 instances x K in {{5,10,20}}, max abs diff {:.1e}", worst));
}

// 3. Graph builders against all-pairs enumeration on 200 games.
void graph_criterion() {
  const auto d = oracle::synthetic_200();
  const EngagementIndex idx(d);
  const oracle::BruteForce brute(d);
  const GraphThresholds th;
  const auto built = build_context_graph(d, idx, th);
  bool ok = true;
  std::string detail;
  for (auto kind : kAllRelations) {
    std::set<oracle::EdgeKey> want;
    if (is_feature_relation(kind)) {
      want = oracle::brute_feature(d.catalog, kind);
    } else if (kind == RelationKind::kCoPurchase) {
      want = brute.co_purchase(th.tau_p);
    } else {
      want = brute.co_dwelling(th.tau_t, brute.mean_gap());
    }
    const auto got = oracle::keys(built.graph.edges(kind));
    ok &= got == want;
    detail += fmt::format("{} {}/{} ", relation_name(kind), got.size(), want.size());
  }
  report(3, "graph builder oracle", ok, detail + "(built/brute force)");
}

// 4. Weight normalization over random cases.
void normalization_criterion() {
  Rng rng(4242);
  std::uniform_int_distribution<int> count(1, 15);
  std::lognormal_distribution<double> minutes(4.5, 1.5);
  double worst_gamma = 0, worst_alpha = 0;
  bool nonneg = true, pct_ok = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const int ng = count(rng);
    std::vector<std::vector<double>> per_game(ng);
    std::vector<std::pair<std::uint32_t, double>> own;
    for (int g = 0; g < ng; ++g) {
      for (int k = count(rng); k > 0; --k) per_game[g].push_back(minutes(rng));
      own.emplace_back(g, per_game[g][std::uniform_int_distribution<std::size_t>(0, per_game[g].size() - 1)(rng)]);
    }
    const PercentileIndex pct(per_game);
    for (int g = 0; g < ng; ++g) {
      auto sorted = per_game[g];
      std::sort(sorted.begin(), sorted.end());
      double prev = 0.0;
      for (double t : sorted) {
        const double p = pct.percentile(g, t);
        pct_ok &= p > 0.0 && p <= 1.0 && p >= prev;
        prev = p;
      }
    }
    const auto gamma = time_weights(own, pct);
    double total = 0;
    for (double w : gamma) {
      nonneg &= w >= 0.0;
      total += w;
    }
    worst_gamma = std::max(worst_gamma, std::abs(total - 1.0));

    const auto state = testing::random_state(1, 1, 6, 9000 + trial);
    const Matrix friends = Matrix::Random(count(rng), 6) * 4.0;
    const Vector query = Vector::Random(6) * 4.0;
    const auto att = social_attention(state, ModelOptions{}, query, friends);
    total = 0;
    for (double a : att.alpha) {
      nonneg &= a >= 0.0;
      total += a;
    }
    worst_alpha = std::max(worst_alpha, std::abs(total - 1.0));
  }
  report(4, "normalization invariants",
         worst_gamma <= 1e-12 && worst_alpha <= 1e-12 && nonneg && pct_ok,
         fmt::format("1000 cases, |sum gamma - 1| <= {:.1e}, |sum alpha - 1| <= {:.1e}, "
                     "non-negative={}, percentile monotone in (0,1]={}",
                     worst_gamma, worst_alpha, nonneg, pct_ok));
}

struct SeedRun {
  double full = 0, pop_count = 0, pop_time = 0, a = 0, b = 0, c = 0;
  std::string report_bytes;  // metrics CSV + JSON of the full model and baselines
};

std::unique_ptr<Prepared> default_prepared(std::uint64_t seed, int threads) {
  SynthConfig sc;
  sc.seed = seed;
  PrepareConfig pc;
  pc.seed = seed;
  pc.threads = threads;
  return prepare(generate(sc).dataset, pc);
}

Hyperparams default_hp(std::uint64_t seed, int threads) {
  Hyperparams hp;
  hp.seed = seed;
  hp.threads = threads;
  return hp;
}

std::string pipeline_report(std::uint64_t seed, int threads, double* full, double* count,
                            double* time) {
  const auto p = default_prepared(seed, threads);
  const auto run = run_variant(*p, default_hp(seed, threads), Variant::kFull);
  auto reports = baseline_reports(*p, threads);
  reports.insert(reports.begin(), {run.name, run.test});
  if (full) *full = run.test.at(10).ndcg;
  if (count) *count = reports[1].second.at(10).ndcg;
  if (time) *time = reports[2].second.at(10).ndcg;
  return metrics_csv(reports) + metrics_json(reports);
}

// 5, 6 and 8 share the seed-1 pipeline run.
void synthetic_criteria() {
  std::vector<SeedRun> runs(5);
  const auto t0 = Clock::now();
  for (std::uint64_t s = 1; s <= 5; ++s) {
    auto& r = runs[s - 1];
    r.report_bytes = pipeline_report(s, 1, &r.full, &r.pop_count, &r.pop_time);
    fmt::print("  seed {}: scgrec {:.4f}  popularity_count {:.4f}  popularity_time {:.4f}\n", s,
               r.full, r.pop_count, r.pop_time);
  }
  const double secs5 = seconds_since(t0);
  int ordered = 0;
  for (const auto& r : runs) ordered += r.full > r.pop_count && r.pop_count > r.pop_time;
  report(5, "synthetic end-to-end ordering", ordered >= 4 && secs5 < 600.0,
         fmt::format("ordering holds in {}/5 seeds, {:.0f}s", ordered, secs5));

  for (std::uint64_t s = 1; s <= 5; ++s) {
    auto& r = runs[s - 1];
    const auto p = default_prepared(s, 1);
    const auto hp = default_hp(s, 1);
    r.a = run_variant(*p, hp, Variant::kA).test.at(10).ndcg;
    r.b = run_variant(*p, hp, Variant::kB).test.at(10).ndcg;
    r.c = run_variant(*p, hp, Variant::kC).test.at(10).ndcg;
    fmt::print("  seed {}: full {:.4f}  A {:.4f}  B {:.4f}  C {:.4f}\n", s, r.full, r.a, r.b, r.c);
  }
  int full_c = 0, a_c = 0, b_c = 0;
  for (const auto& r : runs) {
    full_c += r.full >= r.c;
    a_c += r.a >= r.c;
    b_c += r.b >= r.c;
  }
  report(6, "ablation directionality", full_c >= 4 && a_c >= 3 && b_c >= 3,
         fmt::format("full>=C {}/5, A>=C {}/5, B>=C {}/5", full_c, a_c, b_c));

  const auto again = pipeline_report(1, 1, nullptr, nullptr, nullptr);
  const auto threaded = pipeline_report(1, 4, nullptr, nullptr, nullptr);
  report(8, "determinism",
         again == runs[0].report_bytes && threaded == runs[0].report_bytes,
         fmt::format("seed 1 rerun identical={}, threads 4 vs 1 identical={} ({} bytes)",
                     again == runs[0].report_bytes, threaded == runs[0].report_bytes,
                     runs[0].report_bytes.size()));
}

// 7. Only with the released data; SCGREC_STEAM_DIR holds the three TSV files.
void fidelity_criterion() {
  const char* dir = std::getenv("SCGREC_STEAM_DIR");
  if (!dir) {
    fmt::print("SKIP [7] pipeline fidelity: SCGREC_STEAM_DIR not set\n");
    return;
  }
  const std::filesystem::path root(dir);
  const auto raw =
      load_dataset(root / "engagements.tsv", root / "social.tsv", root / "catalog.tsv").dataset;
  const auto d = filter_users(raw, 5, 60.0);
  std::set<GameId> games;
  for (const auto& e : d.engagements) games.insert(e.game);
  std::set<std::string> devs, pubs;
  for (const auto& g : d.catalog) {
    if (!games.count(g.game)) continue;
    if (!g.developer.empty()) devs.insert(g.developer);
    if (!g.publisher.empty()) pubs.insert(g.publisher);
  }
  const std::array<std::size_t, 6> got = {d.num_users(), games.size(), pubs.size(), devs.size(),
                                          d.engagements.size(), d.social.size()};
  const std::array<std::size_t, 6> want = {3908744, 2707, 689, 1170, 95441434, 10625806};
  report(7, "pipeline fidelity", got == want,
         fmt::format("players {} games {} publishers {} developers {} interactions {} social {}",
                     got[0], got[1], got[2], got[3], got[4], got[5]));
}

}  // namespace
}  // namespace scgrec

int main() {
  using namespace scgrec;
  gradient_criterion();
  metric_criterion();
  graph_criterion();
  normalization_criterion();
  fidelity_criterion();
  synthetic_criteria();
  fmt::print("{} criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
