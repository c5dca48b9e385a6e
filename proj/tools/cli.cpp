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

#include "gnnroute_cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gnnroute/harness.hpp"
#include "gnnroute/version.hpp"

namespace gnnroute {

namespace {

std::vector<Policy> parse_policy_list(const std::string& csv) {
  std::vector<Policy> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto p = parse_policy(item);
    if (!p) throw CLI::ValidationError("--policies", "unknown policy '" + item + "'");
    out.push_back(*p);
  }
  if (out.empty()) throw CLI::ValidationError("--policies", "empty policy list");
  return out;
}

void add_config_option(CLI::App* sub, std::string& sink) {
  sub->add_option("--config", sink, "flat key=value config file; command-line flags win");
}

/// Expands a flat key=value config file into --key=value arguments placed
/// right after the subcommand name. Options use a take-last policy, so the
/// user's own flags (appended afterwards) override file values. Unknown keys
/// surface as ordinary unknown-option errors.
std::vector<std::string> splice_config_args(const std::vector<std::string>& args) {
  std::string config_file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_file = args[i + 1];
    else if (args[i].starts_with("--config=")) config_file = args[i].substr(9);
  }
  if (config_file.empty()) return args;

  std::ifstream in(config_file);
  if (!in) throw CLI::FileError("could not open config file: " + config_file);
  std::vector<std::string> injected;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::size_t eq = line.find('=');
    auto trim = [](std::string s) {
      const auto from = s.find_first_not_of(" \t\r");
      const auto to = s.find_last_not_of(" \t\r");
      return from == std::string::npos ? std::string() : s.substr(from, to - from + 1);
    };
    if (eq == std::string::npos) {
      if (!trim(line).empty())
        throw CLI::FileError(config_file + ":" + std::to_string(line_no) +
                             ": expected key = value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || key == "config")
      throw CLI::FileError(config_file + ":" + std::to_string(line_no) + ": bad key");
    injected.push_back("--" + key + "=" + value);
  }

  // args[0] is the subcommand; file values go before the user's flags
  std::vector<std::string> spliced;
  spliced.push_back(args[0]);
  for (auto& a : injected) spliced.push_back(std::move(a));
  spliced.insert(spliced.end(), args.begin() + 1, args.end());
  return spliced;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"GNN-based DQN agent for traffic-demand routing on arbitrary topologies"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1);
  // config-file values are injected before the user's flags; last one wins
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::string config_sink;

  // train ------------------------------------------------------------------
  TrainCommand train_cmd;
  std::string train_init_checkpoint;
  auto* train = app.add_subcommand("train", "Train the agent on one topology");
  add_config_option(train, config_sink);
  train->add_option("--topology", train_cmd.topology, "topology file (GraphML or edge list)")
      ->required();
  train->add_option("--out-dir", train_cmd.out_dir, "output directory")->required();
  train->add_option("--seed", train_cmd.seed, "master seed");
  train->add_option("--episodes", train_cmd.agent.training_episodes, "training episodes");
  train->add_option("--k", train_cmd.agent.k, "candidate paths per demand");
  train->add_option("--hidden-size", train_cmd.agent.hidden_size, "link hidden state size");
  train->add_option("--msg-steps", train_cmd.agent.msg_steps, "message passing steps");
  train->add_option("--gamma", train_cmd.agent.gamma, "discount factor");
  train->add_option("--learning-rate", train_cmd.agent.learning_rate, "SGD learning rate");
  train->add_option("--momentum", train_cmd.agent.momentum, "Nesterov momentum");
  train->add_option("--grad-clip", train_cmd.agent.grad_clip_norm,
                    "global-norm gradient clip (0 disables)");
  train->add_option("--eval-period", train_cmd.agent.eval_period,
                    "episodes between greedy evaluation sweeps");
  train->add_option("--eval-episodes", train_cmd.agent.eval_episodes,
                    "episodes per evaluation sweep");
  train->add_option("--capacity", train_cmd.agent.max_link_capacity,
                    "link capacity in ODU0 units");
  train->add_option("--epsilon-hold", train_cmd.agent.epsilon_hold_episodes,
                    "episodes at the initial epsilon");
  train->add_option("--epsilon-decay-rate", train_cmd.agent.epsilon_decay_rate,
                    "exponential decay factor");
  train->add_option("--epsilon-decay-period", train_cmd.agent.epsilon_decay_period,
                    "episodes per decay tick");
  train->add_option("--epsilon-min", train_cmd.agent.epsilon_min, "exploration floor");
  train->add_option("--replay-period", train_cmd.agent.replay_period,
                    "episodes between replay rounds");
  train->add_option("--batches-per-replay", train_cmd.agent.batches_per_replay,
                    "batches per replay round");
  train->add_option("--batch-size", train_cmd.agent.batch_size, "replay batch size");
  train->add_flag("--target-network", train_cmd.agent.use_target_network,
                  "hold Bellman targets on a periodically refreshed copy");
  train->add_option("--target-update", train_cmd.agent.target_update_episodes,
                    "episodes between target refreshes");
  train->add_option("--init-checkpoint", train_init_checkpoint,
                    "warm-start parameters from a checkpoint");

  // eval -------------------------------------------------------------------
  EvalCommand eval_cmd;
  std::string eval_policies = "gnn,lb,fluid";
  auto* eval = app.add_subcommand("eval", "Paired policy evaluation on one topology");
  add_config_option(eval, config_sink);
  eval->add_option("--topology", eval_cmd.topology, "topology file")->required();
  eval->add_option("--checkpoint", eval_cmd.checkpoint, "trained checkpoint (for gnn)");
  eval->add_option("--out-dir", eval_cmd.out_dir, "output directory")->required();
  eval->add_option("--seed", eval_cmd.seed, "master seed");
  eval->add_option("--episodes", eval_cmd.episodes, "evaluation episodes");
  eval->add_option("--k", eval_cmd.k, "candidate paths per demand");
  eval->add_option("--capacity", eval_cmd.max_capacity, "link capacity in ODU0 units");
  eval->add_option("--policies", eval_policies, "comma-separated subset of gnn,lb,fluid");

  // zoo-sweep ---------------------------------------------------------------
  ZooSweepCommand zoo_cmd;
  auto* zoo = app.add_subcommand("zoo-sweep",
                                 "Filter a topology directory and evaluate every kept topology");
  add_config_option(zoo, config_sink);
  zoo->add_option("--topology", zoo_cmd.topology_dir, "directory of topology files")->required();
  zoo->add_option("--checkpoint", zoo_cmd.checkpoint, "trained checkpoint")->required();
  zoo->add_option("--out-dir", zoo_cmd.out_dir, "output directory")->required();
  zoo->add_option("--seed", zoo_cmd.seed, "master seed");
  zoo->add_option("--episodes", zoo_cmd.episodes, "episodes per topology");
  zoo->add_option("--k", zoo_cmd.k, "candidate paths per demand");
  zoo->add_option("--capacity", zoo_cmd.max_capacity, "link capacity in ODU0 units");

  // link-failures ------------------------------------------------------------
  LinkFailuresCommand fail_cmd;
  auto* fail = app.add_subcommand("link-failures",
                                  "Evaluate robustness under random connected link removals");
  add_config_option(fail, config_sink);
  fail->add_option("--topology", fail_cmd.topology, "topology file")->required();
  fail->add_option("--checkpoint", fail_cmd.checkpoint, "trained checkpoint")->required();
  fail->add_option("--out-dir", fail_cmd.out_dir, "output directory")->required();
  fail->add_option("--seed", fail_cmd.seed, "master seed");
  fail->add_option("--max-failures", fail_cmd.max_failures, "highest failure count");
  fail->add_option("--step", fail_cmd.failure_step, "failure count increment");
  fail->add_option("--experiments", fail_cmd.experiments, "experiments per failure level");
  fail->add_option("--k", fail_cmd.k, "candidate paths per demand");
  fail->add_option("--capacity", fail_cmd.max_capacity, "link capacity in ODU0 units");
  fail->add_option("--retry-budget", fail_cmd.removal_retry_budget,
                   "connected-removal retry budget");

  // filter --------------------------------------------------------------------
  FilterCommand filter_cmd;
  auto* filter = app.add_subcommand("filter", "Dry-run the topology filter over a directory");
  add_config_option(filter, config_sink);
  filter->add_option("--topology", filter_cmd.topology_dir, "directory of topology files")
      ->required();
  filter->add_option("--out-dir", filter_cmd.out_dir, "output directory")->required();

  // gradcheck -------------------------------------------------------------------
  GradCheckCommand grad_cmd;
  std::string grad_out;
  auto* grad = app.add_subcommand("gradcheck", "Verify analytic gradients by finite differences");
  add_config_option(grad, config_sink);
  grad->add_option("--out-dir", grad_out, "optional report directory");
  grad->add_option("--seed", grad_cmd.seed, "seed for the random check instances");

  std::vector<std::string> spliced;
  try {
    spliced = args.empty() ? args : splice_config_args(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  std::vector<const char*> argv;
  argv.reserve(spliced.size() + 1);
  argv.push_back(kToolName);
  for (const auto& a : spliced) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) {
      if (!train_init_checkpoint.empty()) train_cmd.init_checkpoint = train_init_checkpoint;
      return cmd_train(train_cmd);
    }
    if (*eval) {
      eval_cmd.policies = parse_policy_list(eval_policies);
      const bool needs_gnn = std::find(eval_cmd.policies.begin(), eval_cmd.policies.end(),
                                       Policy::gnn) != eval_cmd.policies.end();
      if (needs_gnn && eval_cmd.checkpoint.empty()) {
        std::cerr << "error: --checkpoint is required when evaluating the gnn policy\n";
        return kExitUsage;
      }
      return cmd_eval(eval_cmd);
    }
    if (*zoo) return cmd_zoo_sweep(zoo_cmd);
    if (*fail) return cmd_link_failures(fail_cmd);
    if (*filter) return cmd_filter(filter_cmd);
    if (*grad) {
      if (!grad_out.empty()) grad_cmd.out_dir = grad_out;
      return cmd_gradcheck(grad_cmd);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace gnnroute
