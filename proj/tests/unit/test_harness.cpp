// Copyright 2026 The gnnroute Authors
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

#include <doctest.h>

#include <fstream>
#include <sstream>

#include "gnnroute/checkpoint.hpp"
#include "gnnroute/harness.hpp"
#include "gnnroute_cli.hpp"
#include "test_support.hpp"

using namespace gnnroute;
using namespace gnnroute::testing;

namespace {

// Counts data lines (excludes the schema comment and the header row).
int csv_data_rows(const std::filesystem::path& file) {
  std::ifstream in(file);
  REQUIRE(in.good());
  std::string line;
  int rows = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    ++rows;
  }
  return rows;
}

std::vector<std::vector<std::string>> csv_rows(const std::filesystem::path& file) {
  std::ifstream in(file);
  REQUIRE(in.good());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    rows.push_back(std::move(fields));
  }
  return rows;
}

// A quick checkpoint for commands that need one: tiny net trained 0 episodes.
std::filesystem::path make_tiny_checkpoint(const std::filesystem::path& dir, int hidden = 6,
                                           int steps = 2) {
  Rng rng(1);
  QNetworkParams params = random_qnetwork({hidden, steps}, rng);
  const auto file = dir / "tiny.ckpt";
  save_qnetwork(file, params, {{"trained_on", "unit-test"}});
  return file;
}

}  // namespace

TEST_CASE("episode seeds are stable and order independent") {
  const auto s5 = episode_seed(123, 5);
  CHECK(episode_seed(123, 5) == s5);
  CHECK(episode_seed(123, 6) != s5);
  CHECK(episode_seed(124, 5) != s5);
}

TEST_CASE("cmd_train writes logs and checkpoints deterministically") {
  const auto dir_a = fresh_temp_dir("train_a");
  const auto dir_b = fresh_temp_dir("train_b");

  TrainCommand cmd;
  cmd.topology = data_file("nsfnet.txt");
  cmd.seed = 11;
  cmd.agent.training_episodes = 4;
  cmd.agent.hidden_size = 6;
  cmd.agent.msg_steps = 2;
  cmd.agent.eval_period = 2;
  cmd.agent.eval_episodes = 2;
  cmd.agent.batch_size = 8;
  cmd.agent.batches_per_replay = 1;
  cmd.agent.max_link_capacity = 64.0;

  cmd.out_dir = dir_a;
  REQUIRE(cmd_train(cmd) == kExitOk);
  cmd.out_dir = dir_b;
  REQUIRE(cmd_train(cmd) == kExitOk);

  CHECK(csv_data_rows(dir_a / "training_log.csv") == 4);
  // byte-identical artifacts across reruns (run_meta.txt carries the clock)
  CHECK(read_file(dir_a / "training_log.csv") == read_file(dir_b / "training_log.csv"));
  CHECK(read_file(dir_a / "checkpoint_best.ckpt") == read_file(dir_b / "checkpoint_best.ckpt"));
  CHECK(read_file(dir_a / "checkpoint_final.ckpt") == read_file(dir_b / "checkpoint_final.ckpt"));
  CHECK(read_file(dir_a / "config_resolved.txt") == read_file(dir_b / "config_resolved.txt"));
  CHECK(std::filesystem::exists(dir_a / "run_meta.txt"));

  // warm start accepts the produced checkpoint
  TrainCommand warm = cmd;
  warm.out_dir = fresh_temp_dir("train_warm");
  warm.agent.training_episodes = 1;
  warm.init_checkpoint = dir_a / "checkpoint_final.ckpt";
  CHECK(cmd_train(warm) == kExitOk);
}

TEST_CASE("cmd_train reports data errors for a missing topology") {
  TrainCommand cmd;
  cmd.topology = "no_such_file.txt";
  cmd.out_dir = fresh_temp_dir("train_missing");
  CHECK(cmd_train(cmd) == kExitData);
}

TEST_CASE("cmd_eval pairs policies on identical demand sequences") {
  const auto dir = fresh_temp_dir("eval");
  const auto ckpt = make_tiny_checkpoint(dir);

  EvalCommand cmd;
  cmd.topology = data_file("nsfnet.txt");
  cmd.checkpoint = ckpt;
  cmd.out_dir = dir / "out";
  cmd.seed = 3;
  cmd.episodes = 5;
  REQUIRE(cmd_eval(cmd) == kExitOk);

  const auto raw = csv_rows(cmd.out_dir / "eval_raw.csv");
  REQUIRE(raw.size() == 1 + 3 * 5);  // header + policies * episodes
  // relative column is score / fluid score, row-wise
  for (std::size_t r = 1; r < raw.size(); ++r) {
    REQUIRE(raw[r].size() == 5);
    const int episode = std::stoi(raw[r][0]);
    double fluid_score = -1.0;
    for (std::size_t q = 1; q < raw.size(); ++q)
      if (std::stoi(raw[q][0]) == episode && raw[q][1] == "fluid")
        fluid_score = std::stod(raw[q][3]);
    REQUIRE(fluid_score > 0.0);
    CHECK(std::stod(raw[r][4]) ==
          doctest::Approx(std::stod(raw[r][3]) / fluid_score).epsilon(1e-6));
  }

  CHECK(csv_data_rows(cmd.out_dir / "eval_summary.csv") == 3);

  SUBCASE("re-running the same config reproduces byte-identical CSVs") {
    EvalCommand again = cmd;
    again.out_dir = dir / "out2";
    REQUIRE(cmd_eval(again) == kExitOk);
    for (const char* name : {"eval_raw.csv", "eval_summary.csv", "eval_cdf.csv",
                             "config_resolved.txt"})
      CHECK(read_file(cmd.out_dir / name) == read_file(again.out_dir / name));
  }

  SUBCASE("the same checkpoint runs on a different topology without retraining") {
    EvalCommand geant = cmd;
    geant.topology = data_file("geant2.txt");
    geant.out_dir = dir / "out_geant";
    geant.episodes = 2;
    CHECK(cmd_eval(geant) == kExitOk);  // link counts differ; size-agnostic
  }

  SUBCASE("fluid-only evaluation needs no checkpoint") {
    EvalCommand fluid_only = cmd;
    fluid_only.checkpoint.clear();
    fluid_only.policies = {Policy::fluid, Policy::lb};
    fluid_only.out_dir = dir / "out_fluid";
    CHECK(cmd_eval(fluid_only) == kExitOk);
  }
}

TEST_CASE("cmd_eval rejects a checkpoint with a foreign feature layout") {
  const auto dir = fresh_temp_dir("eval_layout");
  Rng rng(2);
  QNetworkParams params = QNetworkParams::init({6, 2}, rng);
  const auto stale = dir / "stale.ckpt";
  write_param_container(stale,
                        {{"hidden_size", "6"}, {"msg_steps", "2"}, {"feature_layout", "999"}},
                        params.const_parameter_refs());

  EvalCommand cmd;
  cmd.topology = data_file("nsfnet.txt");
  cmd.checkpoint = stale;
  cmd.out_dir = dir / "out";
  cmd.episodes = 1;
  CHECK(cmd_eval(cmd) == kExitData);
}

TEST_CASE("cmd_zoo_sweep filters a directory and evaluates the survivors") {
  const auto dir = fresh_temp_dir("zoo");
  const auto ckpt = make_tiny_checkpoint(dir);

  ZooSweepCommand cmd;
  cmd.topology_dir = data_file("zoo");
  cmd.checkpoint = ckpt;
  cmd.out_dir = dir / "out";
  cmd.seed = 5;
  cmd.episodes = 2;
  REQUIRE(cmd_zoo_sweep(cmd) == kExitOk);

  // grid3x3 and mesh7 pass the filter; ring, star and the 3-node graph do not
  const auto report = csv_rows(cmd.out_dir / "zoo_filter_report.csv");
  int kept = 0;
  for (std::size_t r = 1; r < report.size(); ++r)
    if (report[r][6] == "1") ++kept;
  CHECK(kept == 2);
  CHECK(csv_data_rows(cmd.out_dir / "zoo_results.csv") == kept);

  // results are ordered by the gnn - lb score difference
  const auto results = csv_rows(cmd.out_dir / "zoo_results.csv");
  for (std::size_t r = 2; r < results.size(); ++r)
    CHECK(std::stod(results[r - 1][10]) <= std::stod(results[r][10]));

  SUBCASE("an empty directory succeeds with empty outputs") {
    ZooSweepCommand empty = cmd;
    empty.topology_dir = fresh_temp_dir("zoo_empty_in");
    empty.out_dir = dir / "out_empty";
    CHECK(cmd_zoo_sweep(empty) == kExitOk);
    CHECK(csv_data_rows(empty.out_dir / "zoo_results.csv") == 0);
  }
}

TEST_CASE("cmd_link_failures produces one row per experiment and matches eval at n=0") {
  const auto dir = fresh_temp_dir("linkfail");
  const auto ckpt = make_tiny_checkpoint(dir);

  LinkFailuresCommand cmd;
  cmd.topology = data_file("nsfnet.txt");
  cmd.checkpoint = ckpt;
  cmd.out_dir = dir / "out";
  cmd.seed = 9;
  cmd.max_failures = 2;
  cmd.failure_step = 2;  // levels 0 and 2
  cmd.experiments = 3;
  REQUIRE(cmd_link_failures(cmd) == kExitOk);

  const auto raw = csv_rows(cmd.out_dir / "link_failure_raw.csv");
  REQUIRE(raw.size() == 1 + 2 * 3);
  int level0 = 0, level2 = 0;
  for (std::size_t r = 1; r < raw.size(); ++r) {
    if (raw[r][0] == "0") ++level0;
    if (raw[r][0] == "2") ++level2;
  }
  CHECK(level0 == 3);
  CHECK(level2 == 3);

  // intact level reproduces cmd_eval scores for the same master seed
  EvalCommand eval_cmd;
  eval_cmd.topology = cmd.topology;
  eval_cmd.checkpoint = ckpt;
  eval_cmd.out_dir = dir / "out_eval";
  eval_cmd.seed = cmd.seed;
  eval_cmd.episodes = cmd.experiments;
  eval_cmd.policies = {Policy::gnn, Policy::fluid};
  REQUIRE(cmd_eval(eval_cmd) == kExitOk);
  const auto eval_raw = csv_rows(eval_cmd.out_dir / "eval_raw.csv");

  for (std::size_t r = 1; r < raw.size(); ++r) {
    if (raw[r][0] != "0") continue;
    const int experiment = std::stoi(raw[r][1]);
    for (std::size_t q = 1; q < eval_raw.size(); ++q) {
      if (std::stoi(eval_raw[q][0]) != experiment) continue;
      if (eval_raw[q][1] == "gnn") CHECK(eval_raw[q][3] == raw[r][2]);
      if (eval_raw[q][1] == "fluid") CHECK(eval_raw[q][3] == raw[r][3]);
    }
  }

  SUBCASE("a failure budget beyond the spanning margin is a data error") {
    LinkFailuresCommand bad = cmd;
    bad.out_dir = dir / "out_bad";
    bad.max_failures = 21 - 13;  // L - (N - 1) = 8 is not allowed either
    CHECK(cmd_link_failures(bad) == kExitData);
  }
}

TEST_CASE("cmd_filter reports every file with a reason") {
  const auto dir = fresh_temp_dir("filter");
  FilterCommand cmd;
  cmd.topology_dir = data_file("zoo");
  cmd.out_dir = dir;
  REQUIRE(cmd_filter(cmd) == kExitOk);
  const auto report = csv_rows(dir / "filter_report.csv");
  REQUIRE(report.size() == 1 + 5);  // five sample files
  for (std::size_t r = 1; r < report.size(); ++r) {
    CHECK(!report[r][7].empty());
    if (report[r][1] == "grid3x3" || report[r][1] == "mesh7") CHECK(report[r][6] == "1");
    else CHECK(report[r][6] == "0");
  }
}

TEST_CASE("gradcheck command verifies and reports") {
  GradCheckCommand cmd;
  cmd.out_dir = fresh_temp_dir("gradcheck");
  CHECK(cmd_gradcheck(cmd) == kExitOk);
  CHECK(csv_data_rows(*cmd.out_dir / "gradcheck_report.csv") > 0);
}

TEST_CASE("cli parses subcommands, flags and config files") {
  SUBCASE("no arguments is a usage error") { CHECK(run_cli({}) == kExitUsage); }
  SUBCASE("unknown subcommand is a usage error") { CHECK(run_cli({"frobnicate"}) == kExitUsage); }
  SUBCASE("missing required flags is a usage error") {
    CHECK(run_cli({"train", "--seed", "3"}) == kExitUsage);
  }
  SUBCASE("unknown policy is a usage error") {
    CHECK(run_cli({"eval", "--topology", data_file("nsfnet.txt").string(), "--out-dir",
                   fresh_temp_dir("cli_badpol").string(), "--policies", "gnn,zigzag"}) ==
          kExitUsage);
  }
  SUBCASE("gnn policy without checkpoint is a usage error") {
    CHECK(run_cli({"eval", "--topology", data_file("nsfnet.txt").string(), "--out-dir",
                   fresh_temp_dir("cli_nockpt").string()}) == kExitUsage);
  }
  SUBCASE("gradcheck runs through the cli") { CHECK(run_cli({"gradcheck"}) == kExitOk); }
  SUBCASE("help and version exit cleanly") {
    CHECK(run_cli({"--help"}) == kExitOk);
    CHECK(run_cli({"--version"}) == kExitOk);
  }
  SUBCASE("config file supplies values, command line wins") {
    const auto dir = fresh_temp_dir("cli_config");
    {
      std::ofstream cfg(dir / "run.cfg");
      cfg << "topology=" << data_file("nsfnet.txt").string() << "\n";
      cfg << "episodes=3\n";
      cfg << "hidden-size=6\n";
      cfg << "msg-steps=2\n";
      cfg << "eval-period=0\n";
      cfg << "capacity=32\n";
    }
    // config only: 3 episodes
    CHECK(run_cli({"train", "--config", (dir / "run.cfg").string(), "--out-dir",
                   (dir / "a").string()}) == kExitOk);
    CHECK(csv_data_rows(dir / "a" / "training_log.csv") == 3);
    // CLI override: 2 episodes
    CHECK(run_cli({"train", "--config", (dir / "run.cfg").string(), "--out-dir",
                   (dir / "b").string(), "--episodes", "2"}) == kExitOk);
    CHECK(csv_data_rows(dir / "b" / "training_log.csv") == 2);
  }
  SUBCASE("data errors surface as exit code 2") {
    CHECK(run_cli({"train", "--topology", "missing.txt", "--out-dir",
                   fresh_temp_dir("cli_missing").string()}) == kExitData);
  }
}
