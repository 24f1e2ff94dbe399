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
#include <cstdio>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "support.hpp"

namespace scgrec {
namespace {

namespace fs = std::filesystem;

struct Result {
  int status = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(SCGREC_CLI) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) r.out += buf;
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small instance shared by every command below.
fs::path write_config(const fs::path& dir) {
  const auto path = dir / "config.json";
  nlohmann::json c = {{"n_users", 500},   {"n_games", 60},   {"eval_users", 150},
                      {"dim", 8},         {"batch_size", 256}, {"max_epochs", 4},
                      {"patience", 2},    {"sweep_social", {0.0, 0.1}},
                      {"sweep_context", {0.5}}};
  std::ofstream(path) << c.dump(2);
  return path;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = testing::temp_dir(::testing::UnitTest::GetInstance()->current_test_info()->name());
    config_ = write_config(root_);
    data_ = root_ / "data";
    ASSERT_EQ(run(fmt("gen-synthetic --out {}", data_)).status, 0);
  }
  std::string fmt(const std::string& pattern, const fs::path& p) const {
    std::string s = pattern;
    s.replace(s.find("{}"), 2, p.string());
    return "--config " + config_.string() + " " + s;
  }
  std::string with_data(const std::string& cmd, const fs::path& out) const {
    return "--config " + config_.string() + " --data " + data_.string() + " --out " +
           out.string() + " " + cmd;
  }
  fs::path root_, config_, data_;
};

TEST_F(Cli, TrainEvaluateRecommend) {
  const auto out = root_ / "run";
  ASSERT_EQ(run(with_data("train", out)).status, 0);
  EXPECT_TRUE(fs::exists(out / "model.ckpt"));
  EXPECT_TRUE(fs::exists(out / "training_log.jsonl"));
  ASSERT_EQ(run(with_data("evaluate", out)).status, 0);
  const auto metrics = nlohmann::json::parse(slurp(out / "metrics.json"));
  for (const char* m : {"scgrec", "popularity_count", "popularity_time"}) {
    ASSERT_TRUE(metrics.contains(m)) << m;
    EXPECT_TRUE(metrics[m].contains("ndcg@10"));
  }
  EXPECT_TRUE(fs::exists(out / "metrics.csv"));
  const auto manifest = nlohmann::json::parse(slurp(out / "run_manifest.json"));
  EXPECT_EQ(manifest["command"], "evaluate");
  EXPECT_FALSE(manifest["inputs"].empty());

  const auto rec = run(with_data("recommend --user 42 --k 10", out));
  ASSERT_EQ(rec.status, 0);
  std::istringstream lines(rec.out);
  std::string line;
  std::vector<double> scores;
  while (std::getline(lines, line)) {
    const auto tab = line.find('\t');
    ASSERT_NE(tab, std::string::npos) << line;
    scores.push_back(std::stod(line.substr(tab + 1)));
  }
  ASSERT_EQ(scores.size(), 10u);
  EXPECT_TRUE(std::is_sorted(scores.rbegin(), scores.rend()));
  EXPECT_EQ(run(with_data("recommend --user 999999 --k 10", out)).status, 1);
}

TEST_F(Cli, ThreadCountDoesNotChangeReports) {
  std::vector<std::string> reports;
  for (int threads : {1, 4}) {
    const auto out = root_ / ("t" + std::to_string(threads));
    const auto flag = " --threads " + std::to_string(threads);
    ASSERT_EQ(run(with_data("train" + flag, out)).status, 0);
    ASSERT_EQ(run(with_data("evaluate" + flag, out)).status, 0);
    reports.push_back(slurp(out / "metrics.json") + slurp(out / "metrics.csv"));
  }
  EXPECT_EQ(reports[0], reports[1]);
  EXPECT_FALSE(reports[0].empty());
}

TEST_F(Cli, OtherCommands) {
  const auto out = root_ / "misc";
  ASSERT_EQ(run(with_data("analyze", out)).status, 0);
  EXPECT_TRUE(fs::exists(out / "analysis" / "analysis_summary.json"));
  ASSERT_EQ(run(with_data("build-graph", out)).status, 0);
  EXPECT_TRUE(fs::exists(out / "graph" / "co_purchase.tsv") || fs::exists(out / "co_purchase.tsv"));
  ASSERT_EQ(run(with_data("sweep", out)).status, 0);
  EXPECT_TRUE(fs::exists(out / "sweep.csv"));
  ASSERT_EQ(run(with_data("grad-check", out)).status, 0);
  const auto g = nlohmann::json::parse(slurp(out / "grad_check.json"));
  EXPECT_EQ(g["failures"], 0);
}

TEST_F(Cli, ExitCodes) {
  const auto out = root_ / "codes";
  EXPECT_EQ(run(with_data("train --set learnin_rate=0.1", out)).status, 2);
  EXPECT_EQ(run(with_data("frobnicate", out)).status, 2);
  EXPECT_EQ(run("--data " + (root_ / "nowhere").string() + " --out " + out.string() + " train")
                .status,
            1);
  EXPECT_EQ(run(with_data("evaluate --model " + (root_ / "none.ckpt").string(), out)).status, 1);
}

}  // namespace
}  // namespace scgrec
