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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gnnroute/agent.hpp"
#include "gnnroute/baselines.hpp"

namespace gnnroute {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitVerification = 3,
};

/// Per-episode seeds derive as hash(master_seed, experiment_tag, index); an
/// episode's demand stream never depends on how many episodes ran before it.
std::uint64_t episode_seed(std::uint64_t master_seed, std::uint64_t index);

struct TrainCommand {
  std::filesystem::path topology;
  std::filesystem::path out_dir;
  std::uint64_t seed = 1;
  AgentConfig agent;
  std::optional<std::filesystem::path> init_checkpoint;  // warm start
};

struct EvalCommand {
  std::filesystem::path topology;
  std::filesystem::path checkpoint;  // required iff policies include gnn
  std::filesystem::path out_dir;
  std::uint64_t seed = 1;
  int episodes = 100;
  int k = 4;
  double max_capacity = kDefaultLinkCapacity;
  std::vector<Policy> policies = {Policy::gnn, Policy::lb, Policy::fluid};
};

struct ZooSweepCommand {
  std::filesystem::path topology_dir;
  std::filesystem::path checkpoint;
  std::filesystem::path out_dir;
  std::uint64_t seed = 1;
  int episodes = 100;  // per topology
  int k = 4;
  double max_capacity = kDefaultLinkCapacity;
};

struct LinkFailuresCommand {
  std::filesystem::path topology;
  std::filesystem::path checkpoint;
  std::filesystem::path out_dir;
  std::uint64_t seed = 1;
  int max_failures = 10;
  int failure_step = 1;    // evaluate n = 0, step, 2*step, ...
  int experiments = 100;   // per failure level
  int k = 4;
  double max_capacity = kDefaultLinkCapacity;
  int removal_retry_budget = 1000;
};

struct FilterCommand {
  std::filesystem::path topology_dir;
  std::filesystem::path out_dir;
};

struct GradCheckCommand {
  std::optional<std::filesystem::path> out_dir;
  double unit_tolerance = 1e-5;   // dense / recurrent cell blocks
  double model_tolerance = 1e-4;  // full q-value model
  std::uint64_t seed = 7;
};

/// Paired evaluation of several policies over n episodes. The fluid policy
/// is always computed (it is the reference for relative scores) even when
/// not requested for output.
struct EvalSummary {
  std::vector<Policy> policies;
  // scores[p][i]: policy p, episode i; seeds[i] is the shared demand seed.
  std::vector<std::vector<double>> scores;
  std::vector<std::uint64_t> seeds;
  std::vector<double> fluid_scores;
};

EvalSummary evaluate_policies(const Topology& topo, const PathTable& table,
                              const std::vector<Policy>& policies, int episodes,
                              std::uint64_t master_seed, const QNetworkParams* params,
                              double max_capacity);

int cmd_train(const TrainCommand& cmd);
int cmd_eval(const EvalCommand& cmd);
int cmd_zoo_sweep(const ZooSweepCommand& cmd);
int cmd_link_failures(const LinkFailuresCommand& cmd);
int cmd_filter(const FilterCommand& cmd);
int cmd_gradcheck(const GradCheckCommand& cmd);

}  // namespace gnnroute
