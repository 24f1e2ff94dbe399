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
#include "scgrec/cli.hpp"

#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <fmt/core.h>
#include <fmt/os.h>

#include "scgrec/checkpoint.hpp"

namespace scgrec {
namespace {

using Json = nlohmann::json;
using Setter = std::function<void(RunConfig&, const Json&)>;

const char* variant_label(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kA: return "A";
    case Variant::kB: return "B";
    case Variant::kC: return "C";
  }
  return "full";
}

std::size_t as_count(const std::string& key, const Json& v) {
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return v.get<std::size_t>();
  throw ConfigError(fmt::format("{}: expected a non-negative integer, got {}", key, v.dump()));
}

double as_real(const std::string& key, const Json& v) {
  if (!v.is_number()) throw ConfigError(fmt::format("{}: expected a number, got {}", key, v.dump()));
  return v.get<double>();
}

std::string as_text(const std::string& key, const Json& v) {
  if (!v.is_string()) throw ConfigError(fmt::format("{}: expected a string, got {}", key, v.dump()));
  return v.get<std::string>();
}

std::vector<double> as_reals(const std::string& key, const Json& v) {
  if (!v.is_array() || v.empty()) {
    throw ConfigError(fmt::format("{}: expected a non-empty array of numbers", key));
  }
  std::vector<double> out;
  for (const auto& x : v) out.push_back(as_real(key, x));
  return out;
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"data", [](RunConfig& c, const Json& v) { c.data = as_text("data", v); }},
      {"engagements", [](RunConfig& c, const Json& v) { c.engagements = as_text("engagements", v); }},
      {"social", [](RunConfig& c, const Json& v) { c.social = as_text("social", v); }},
      {"catalog", [](RunConfig& c, const Json& v) { c.catalog = as_text("catalog", v); }},
      {"out", [](RunConfig& c, const Json& v) { c.out = as_text("out", v); }},
      {"seed", [](RunConfig& c, const Json& v) { c.seed = as_count("seed", v); }},
      {"threads",
       [](RunConfig& c, const Json& v) {
         const auto n = as_count("threads", v);
         if (n < 1 || n > 1024) throw ConfigError("threads: must lie in [1, 1024]");
         c.threads = static_cast<int>(n);
       }},
      {"min_games", [](RunConfig& c, const Json& v) { c.prepare.min_games = as_count("min_games", v); }},
      {"min_total_minutes",
       [](RunConfig& c, const Json& v) { c.prepare.min_total_minutes = as_real("min_total_minutes", v); }},
      {"sample_fraction",
       [](RunConfig& c, const Json& v) { c.prepare.sample_fraction = as_real("sample_fraction", v); }},
      {"eval_users", [](RunConfig& c, const Json& v) { c.prepare.eval_users = as_count("eval_users", v); }},
      {"holdout_fraction",
       [](RunConfig& c, const Json& v) { c.prepare.holdout_fraction = as_real("holdout_fraction", v); }},
      {"tau_p", [](RunConfig& c, const Json& v) { c.prepare.thresholds.tau_p = as_real("tau_p", v); }},
      {"tau_t", [](RunConfig& c, const Json& v) { c.prepare.thresholds.tau_t = as_real("tau_t", v); }},
      {"T",
       [](RunConfig& c, const Json& v) {
         if (v.is_null()) {
           c.prepare.thresholds.T.reset();
         } else {
           c.prepare.thresholds.T = as_real("T", v);
         }
       }},
      {"dim", [](RunConfig& c, const Json& v) { c.hp.dim = as_count("dim", v); }},
      {"learning_rate", [](RunConfig& c, const Json& v) { c.hp.learning_rate = as_real("learning_rate", v); }},
      {"batch_size", [](RunConfig& c, const Json& v) { c.hp.batch_size = as_count("batch_size", v); }},
      {"lambda", [](RunConfig& c, const Json& v) { c.hp.lambda = as_real("lambda", v); }},
      {"w_context",
       [](RunConfig& c, const Json& v) { c.hp.setup.weights.context = as_real("w_context", v); }},
      {"w_social", [](RunConfig& c, const Json& v) { c.hp.setup.weights.social = as_real("w_social", v); }},
      {"patience", [](RunConfig& c, const Json& v) { c.hp.patience = as_count("patience", v); }},
      {"max_epochs", [](RunConfig& c, const Json& v) { c.hp.max_epochs = as_count("max_epochs", v); }},
      {"negatives", [](RunConfig& c, const Json& v) { c.hp.negatives = as_count("negatives", v); }},
      {"normalization",
       [](RunConfig& c, const Json& v) {
         const auto s = as_text("normalization", v);
         if (s == "mean") {
           c.hp.setup.options.normalization = Normalization::kMean;
         } else if (s == "symmetric") {
           c.hp.setup.options.normalization = Normalization::kSymmetric;
         } else {
           throw ConfigError(fmt::format("normalization: expected \"mean\" or \"symmetric\", got \"{}\"", s));
         }
       }},
      {"leaky_slope",
       [](RunConfig& c, const Json& v) { c.hp.setup.options.leaky_slope = as_real("leaky_slope", v); }},
      {"variant",
       [](RunConfig& c, const Json& v) {
         try {
           c.variant = parse_variant(as_text("variant", v));
         } catch (const std::invalid_argument& e) {
           throw ConfigError(fmt::format("variant: {}", e.what()));
         }
       }},
      {"n_users", [](RunConfig& c, const Json& v) { c.synth.n_users = as_count("n_users", v); }},
      {"n_games", [](RunConfig& c, const Json& v) { c.synth.n_games = as_count("n_games", v); }},
      {"n_genres", [](RunConfig& c, const Json& v) { c.synth.n_genres = as_count("n_genres", v); }},
      {"n_developers", [](RunConfig& c, const Json& v) { c.synth.n_developers = as_count("n_developers", v); }},
      {"n_publishers", [](RunConfig& c, const Json& v) { c.synth.n_publishers = as_count("n_publishers", v); }},
      {"engagements_per_user",
       [](RunConfig& c, const Json& v) {
         c.synth.engagements_per_user = as_count("engagements_per_user", v);
       }},
      {"homophily", [](RunConfig& c, const Json& v) { c.synth.homophily = as_real("homophily", v); }},
      {"dwell_scale", [](RunConfig& c, const Json& v) { c.synth.dwell_scale = as_real("dwell_scale", v); }},
      {"top_genres", [](RunConfig& c, const Json& v) { c.analysis.top_genres = as_count("top_genres", v); }},
      {"top_games", [](RunConfig& c, const Json& v) { c.analysis.top_games = as_count("top_games", v); }},
      {"sweep_social", [](RunConfig& c, const Json& v) { c.sweep_social = as_reals("sweep_social", v); }},
      {"sweep_context",
       [](RunConfig& c, const Json& v) { c.sweep_context = as_reals("sweep_context", v); }},
  };
  return table;
}

void apply(RunConfig& c, const std::string& key, const Json& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError(fmt::format("unknown config key \"{}\"", key));
  it->second(c, value);
}

// Checks everything that depends on more than one key.
void finish(RunConfig& c) {
  c.prepare.seed = c.seed;
  c.prepare.threads = c.threads;
  c.hp.seed = c.seed;
  c.hp.threads = c.threads;
  c.synth.seed = c.seed;
  c.analysis.seed = c.seed;
  try {
    c.hp.setup.weights = FusionWeights::from(c.hp.setup.weights.context, c.hp.setup.weights.social);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("w_context/w_social: {}", e.what()));
  }
  auto check = [](const char* what, auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(fmt::format("{}: {}", what, e.what()));
    }
  };
  check("preprocessing", [&] { c.prepare.validate(); });
  check("hyperparameters", [&] { c.hp.validate(); });
  check("synthetic", [&] { c.synth.validate(); });
  if (!(c.hp.setup.options.leaky_slope >= 0.0)) throw ConfigError("leaky_slope: must be >= 0");
  if (c.analysis.top_genres < 1) throw ConfigError("top_genres: must be >= 1");
  for (const auto* grid : {&c.sweep_social, &c.sweep_context}) {
    for (double w : *grid) {
      if (w < 0.0 || w > 1.0) throw ConfigError("sweep weights must lie in [0, 1]");
    }
  }
}

Json parse_override_value(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error&) {
    return Json(text);  // bare strings need no quotes
  }
}

// ---------------------------------------------------------------------------

struct Session {
  std::string command;
  RunConfig config;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;

  std::filesystem::path output(const std::string& name) {
    outputs.push_back(config.out / name);
    return outputs.back();
  }
};

void progress(const std::string& line) { std::cerr << line << std::endl; }

Dataset load(Session& s) {
  const auto& c = s.config;
  s.inputs = {c.engagements_path(), c.social_path(), c.catalog_path()};
  auto loaded = load_dataset(c.engagements_path(), c.social_path(), c.catalog_path());
  const auto& r = loaded.report;
  progress(fmt::format("loaded {} engagements, {} social edges, {} games", loaded.dataset.engagements.size(),
                       loaded.dataset.social.size(), loaded.dataset.catalog.size()));
  if (r.merged_duplicates) progress(fmt::format("warning: merged {} duplicate engagement rows", r.merged_duplicates));
  if (r.dropped_unknown_game) {
    progress(fmt::format("warning: dropped {} engagements for unknown games", r.dropped_unknown_game));
  }
  if (r.dropped_social_unknown) {
    progress(fmt::format("warning: dropped {} social edges to unknown users", r.dropped_social_unknown));
  }
  if (r.dropped_social_invalid) {
    progress(fmt::format("warning: dropped {} self-loop or repeated social edges", r.dropped_social_invalid));
  }
  return std::move(loaded.dataset);
}

std::unique_ptr<Prepared> prepare_data(Session& s) {
  const Dataset raw = load(s);
  auto p = prepare(raw, s.config.prepare);
  progress(fmt::format("prepared {} users ({} evaluation), {} training engagements",
                       p->train_index->num_users(), p->split.eval_users.size(),
                       p->train_index->num_engagements()));
  return p;
}

Checkpoint load_matching_checkpoint(const std::filesystem::path& path, const Prepared& p) {
  auto ckpt = load_checkpoint(path);
  if (ckpt.user_ids != p.train_index->user_ids() || ckpt.game_ids != p.train_index->game_ids()) {
    throw std::runtime_error(fmt::format(
        "{} was trained on different users or games than the configured data", path.string()));
  }
  return ckpt;
}

// Model setup recorded in a checkpoint (the configuration used to train it).
std::pair<Variant, ModelSetup> checkpoint_setup(const Checkpoint& ckpt) {
  Json recorded = Json::object();
  for (const auto& key : {"w_context", "w_social", "normalization", "leaky_slope", "variant"}) {
    if (ckpt.hyperparams.contains(key)) recorded[key] = ckpt.hyperparams.at(key);
  }
  const RunConfig c = resolve_config(recorded, {});
  return {c.variant, ablation_setup(c.hp.setup, c.variant)};
}

int cmd_gen_synthetic(Session& s) {
  const auto data = generate(s.config.synth);
  write_synthetic(data, s.config.synth, s.config.out);
  for (const auto* f : {"engagements.tsv", "social.tsv", "catalog.tsv", "latents.json"}) s.output(f);
  progress(fmt::format("wrote synthetic data ({} users, {} engagements, {} social edges) to {}",
                       data.dataset.num_users(), data.dataset.engagements.size(),
                       data.dataset.social.size(), s.config.out.string()));
  return 0;
}

int cmd_analyze(Session& s) {
  const Dataset d = load(s);
  const auto dir = s.config.out / "analysis";
  write_analysis(d, s.config.analysis, dir);
  s.outputs.push_back(dir);
  progress(fmt::format("wrote analysis reports to {}", dir.string()));
  return 0;
}

int cmd_build_graph(Session& s) {
  auto p = prepare_data(s);
  const auto dir = s.config.out / "graph";
  write_context_graph(*p->graph, s.config.prepare.thresholds, p->dwelling_T, dir);
  s.outputs.push_back(dir);
  for (auto kind : kAllRelations) {
    progress(fmt::format("{}: {} edges", relation_name(kind), p->graph->num_edges(kind)));
  }
  return 0;
}

int cmd_train(Session& s) {
  auto p = prepare_data(s);
  auto log = fmt::output_file(s.output("training_log.jsonl").string());
  const auto run = run_variant(*p, s.config.hp, s.config.variant, [&log](const EpochLog& e) {
    log.print("{}\n", e.to_json_line());
    log.flush();
    progress(fmt::format("epoch {:3d}  loss {:.4f}  val ndcg@10 {:.4f}  {:.1f}s", e.epoch,
                         e.train_loss, e.val_ndcg10, e.elapsed_seconds));
  });
  log.close();
  Checkpoint ckpt{run.result.state, p->train_index->user_ids(), p->train_index->game_ids(),
                  nlohmann::ordered_json(s.config.to_json())};
  save_checkpoint(ckpt, s.output("model.ckpt"));
  nlohmann::ordered_json summary;
  summary["model"] = run.name;
  summary["epochs"] = run.result.log.size();
  summary["best_epoch"] = run.result.best_epoch;
  summary["best_val_ndcg10"] = run.result.best_val_ndcg10;
  std::ofstream(s.output("train_summary.json")) << summary.dump(2) << '\n';
  progress(fmt::format("best epoch {} (val ndcg@10 {:.4f})", run.result.best_epoch,
                       run.result.best_val_ndcg10));
  return 0;
}

int cmd_evaluate(Session& s, const std::filesystem::path& model) {
  auto p = prepare_data(s);
  const auto path = model.empty() ? s.config.out / "model.ckpt" : model;
  s.inputs.push_back(path);
  const auto ckpt = load_matching_checkpoint(path, *p);
  const auto [variant, setup] = checkpoint_setup(ckpt);
  const ScgrecRecommender rec(variant_name(variant), ckpt.state, *p->ctx, setup.options,
                              setup.weights, s.config.threads);
  std::vector<NamedReport> reports;
  reports.emplace_back(rec.name(), evaluate(rec, p->eval, Phase::kTest, s.config.threads));
  for (auto& r : baseline_reports(*p, s.config.threads)) reports.push_back(std::move(r));
  write_metrics(reports, s.config.out, "metrics");
  s.output("metrics.json");
  s.output("metrics.csv");
  for (const auto& [name, r] : reports) {
    progress(fmt::format("{:<18} ndcg@10 {:.4f}  recall@10 {:.4f}  ({} users)", name,
                         r.at(10).ndcg, r.at(10).recall, r.users));
  }
  return 0;
}

int cmd_recommend(Session& s, const std::filesystem::path& model, UserId user, std::size_t k) {
  auto p = prepare_data(s);
  const auto path = model.empty() ? s.config.out / "model.ckpt" : model;
  s.inputs.push_back(path);
  const auto ckpt = load_matching_checkpoint(path, *p);
  const auto u = p->train_index->user_index(user);
  if (!u) throw std::runtime_error(fmt::format("user {} is not in the training data", user));
  const auto [variant, setup] = checkpoint_setup(ckpt);
  const auto scores = score_all(ckpt.state, *p->ctx, setup.options, setup.weights, *u);
  const auto exclude = p->train_index->games_of(*u);
  const auto ranked = rank_for_user(scores, exclude, k);
  for (const auto g : ranked) {
    std::cout << fmt::format("{}\t{:.6f}\n", p->train_index->game_ids()[g], scores[g]);
  }
  return 0;
}

int cmd_grad_check(Session& s) {
  // A tiny generated instance keeps the full check to a few seconds.
  SynthConfig tiny;
  tiny.n_users = 6;
  tiny.n_games = 8;
  tiny.n_genres = 3;
  tiny.n_developers = 3;
  tiny.n_publishers = 3;
  tiny.engagements_per_user = 4;
  tiny.seed = s.config.seed;
  const auto data = generate(tiny);
  const EngagementIndex index(data.dataset);
  const auto graph = build_context_graph(data.dataset, index, s.config.prepare.thresholds).graph;
  const ForwardContext ctx(index, graph);
  const auto setup = ablation_setup(s.config.hp.setup, s.config.variant);
  const auto state = ModelState::random(index.num_users(), index.num_games(), 4,
                                        derive_seed(s.config.seed, 0));
  const auto triplets = sample_triplets(index, derive_seed(s.config.seed, 1)).triplets;
  const double lambda = std::max(s.config.hp.lambda, 1e-3);
  const auto report = gradient_check(state, ctx, setup, triplets, lambda);

  nlohmann::ordered_json j;
  j["parameters"] = report.entries.size();
  j["failures"] = report.failures;
  j["max_relative_error"] = report.max_relative_error;
  auto& failed = j["failed_entries"] = nlohmann::ordered_json::array();
  for (const auto& e : report.entries) {
    if (!e.ok) {
      failed.push_back({{"tensor", e.tensor}, {"offset", e.offset}, {"analytic", e.analytic},
                        {"numeric", e.numeric}});
    }
  }
  std::ofstream(s.output("grad_check.json")) << j.dump(2) << '\n';
  progress(fmt::format("gradient check: {} parameters, {} failures, max relative error {:.3g}",
                       report.entries.size(), report.failures, report.max_relative_error));
  return report.passed() ? 0 : 1;
}

int cmd_sweep(Session& s) {
  auto p = prepare_data(s);
  auto csv = fmt::output_file(s.output("sweep.csv").string());
  csv.print("w_social,w_context,w_self,best_epoch,ndcg@10,recall@10,hit@10,precision@10\n");
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (double ws : s.config.sweep_social) {
    for (double wc : s.config.sweep_context) {
      if (ws + wc > 1.0 + 1e-12) continue;
      Hyperparams hp = s.config.hp;
      hp.setup.weights = FusionWeights::from(wc, ws);
      const auto run = run_variant(*p, hp, Variant::kFull);
      const auto& m = run.test.at(10);
      csv.print("{},{},{},{},{:.6f},{:.6f},{:.6f},{:.6f}\n", ws, wc, hp.setup.weights.self,
                run.result.best_epoch, m.ndcg, m.recall, m.hit_ratio, m.precision);
      rows.push_back({{"w_social", ws}, {"w_context", wc}, {"best_epoch", run.result.best_epoch},
                      {"test", nlohmann::ordered_json::parse(metrics_json({{run.name, run.test}}))}});
      progress(fmt::format("w_social {} w_context {}: test ndcg@10 {:.4f}", ws, wc, m.ndcg));
    }
  }
  csv.close();
  std::ofstream(s.output("sweep.json")) << rows.dump(2) << '\n';
  return 0;
}

void write_manifest(const Session& s) {
  nlohmann::ordered_json j;
  j["command"] = s.command;
  j["seed"] = s.config.seed;
  j["config"] = s.config.to_json();
  j["versions"] = {
      {"scgrec", "1.0.0"},
      {"format_checkpoint", kCheckpointVersion},
      {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
      {"fmt", FMT_VERSION},
      {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR,
                                    NLOHMANN_JSON_VERSION_MINOR, NLOHMANN_JSON_VERSION_PATCH)},
      {"compiler", __VERSION__}};
  auto& inputs = j["inputs"] = nlohmann::ordered_json::array();
  for (const auto& path : s.inputs) {
    inputs.push_back({{"path", path.string()},
                      {"bytes", std::filesystem::file_size(path)},
                      {"fnv1a64", file_checksum(path)}});
  }
  auto& outputs = j["outputs"] = nlohmann::ordered_json::array();
  for (const auto& path : s.outputs) outputs.push_back(path.string());
  std::ofstream(s.config.out / "run_manifest.json") << j.dump(2) << '\n';
}

}  // namespace

std::filesystem::path RunConfig::engagements_path() const {
  return engagements.empty() ? data / "engagements.tsv" : engagements;
}
std::filesystem::path RunConfig::social_path() const {
  return social.empty() ? data / "social.tsv" : social;
}
std::filesystem::path RunConfig::catalog_path() const {
  return catalog.empty() ? data / "catalog.tsv" : catalog;
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["data"] = data.string();
  j["engagements"] = engagements_path().string();
  j["social"] = social_path().string();
  j["catalog"] = catalog_path().string();
  j["out"] = out.string();
  j["seed"] = seed;
  j["threads"] = threads;
  j["min_games"] = prepare.min_games;
  j["min_total_minutes"] = prepare.min_total_minutes;
  j["sample_fraction"] = prepare.sample_fraction;
  j["eval_users"] = prepare.eval_users;
  j["holdout_fraction"] = prepare.holdout_fraction;
  j["tau_p"] = prepare.thresholds.tau_p;
  j["tau_t"] = prepare.thresholds.tau_t;
  j["T"] = prepare.thresholds.T ? nlohmann::ordered_json(*prepare.thresholds.T)
                                 : nlohmann::ordered_json(nullptr);
  j["dim"] = hp.dim;
  j["learning_rate"] = hp.learning_rate;
  j["batch_size"] = hp.batch_size;
  j["lambda"] = hp.lambda;
  j["w_context"] = hp.setup.weights.context;
  j["w_social"] = hp.setup.weights.social;
  j["patience"] = hp.patience;
  j["max_epochs"] = hp.max_epochs;
  j["negatives"] = hp.negatives;
  j["normalization"] = hp.setup.options.normalization == Normalization::kMean ? "mean" : "symmetric";
  j["leaky_slope"] = hp.setup.options.leaky_slope;
  j["variant"] = variant_label(variant);
  j["n_users"] = synth.n_users;
  j["n_games"] = synth.n_games;
  j["n_genres"] = synth.n_genres;
  j["n_developers"] = synth.n_developers;
  j["n_publishers"] = synth.n_publishers;
  j["engagements_per_user"] = synth.engagements_per_user;
  j["homophily"] = synth.homophily;
  j["dwell_scale"] = synth.dwell_scale;
  j["top_genres"] = analysis.top_genres;
  j["top_games"] = analysis.top_games;
  j["sweep_social"] = sweep_social;
  j["sweep_context"] = sweep_context;
  return j;
}

RunConfig resolve_config(const Json& config, const std::vector<std::string>& overrides) {
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  for (const auto& [key, value] : config.items()) apply(c, key, value);
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError(fmt::format("override \"{}\" is not of the form key=value", o));
    }
    apply(c, o.substr(0, eq), parse_override_value(o.substr(eq + 1)));
  }
  finish(c);
  return c;
}

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return fmt::format("{:016x}", h);
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Game recommendation with social and context graphs"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<int> threads;
  std::optional<std::string> out, data;
  std::optional<std::uint64_t> seed;
  app.add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--set", overrides, "key=value override (repeatable)");
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--out", out, "output directory");
  app.add_option("--data", data, "directory with engagements.tsv, social.tsv, catalog.tsv");
  app.add_option("--seed", seed, "random seed");

  std::string model;
  UserId user = 0;
  std::size_t k = 10;
  std::map<std::string, CLI::App*> subs;
  subs["gen-synthetic"] = app.add_subcommand("gen-synthetic", "write a synthetic dataset to --out");
  subs["analyze"] = app.add_subcommand("analyze", "dataset statistics reports");
  subs["build-graph"] = app.add_subcommand("build-graph", "build and write the game context graph");
  subs["train"] = app.add_subcommand("train", "train a model and write model.ckpt");
  subs["evaluate"] = app.add_subcommand("evaluate", "test metrics for the model and baselines");
  subs["recommend"] = app.add_subcommand("recommend", "top-k games for one user");
  subs["grad-check"] = app.add_subcommand("grad-check", "finite-difference gradient check");
  subs["sweep"] = app.add_subcommand("sweep", "grid over social and context weights");
  for (const auto* name : {"evaluate", "recommend"}) {
    subs[name]->add_option("--model", model, "checkpoint (default <out>/model.ckpt)");
  }
  subs["recommend"]->add_option("--user", user, "user id")->required();
  subs["recommend"]->add_option("--k", k, "number of games")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Session s;
  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) s.command = name;
  }
  try {
    Json config = Json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      try {
        config = Json::parse(in);
      } catch (const Json::parse_error& e) {
        throw ConfigError(fmt::format("{}: {}", config_path, e.what()));
      }
    }
    // Dedicated flags take precedence over the file and --set.
    if (threads) overrides.push_back(fmt::format("threads={}", *threads));
    if (seed) overrides.push_back(fmt::format("seed={}", *seed));
    s.config = resolve_config(config, overrides);
    if (out) s.config.out = *out;
    if (data) s.config.data = *data;
  } catch (const ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << std::endl;
    return 2;
  }

  try {
    std::filesystem::create_directories(s.config.out);
    int status = 0;
    if (s.command == "gen-synthetic") status = cmd_gen_synthetic(s);
    if (s.command == "analyze") status = cmd_analyze(s);
    if (s.command == "build-graph") status = cmd_build_graph(s);
    if (s.command == "train") status = cmd_train(s);
    if (s.command == "evaluate") status = cmd_evaluate(s, model);
    if (s.command == "recommend") status = cmd_recommend(s, model, user, k);
    if (s.command == "grad-check") status = cmd_grad_check(s);
    if (s.command == "sweep") status = cmd_sweep(s);
    write_manifest(s);
    return status;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
}

}  // namespace scgrec
