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

#include "gnnroute/baselines.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "gnnroute/agent.hpp"

namespace gnnroute {

int lb_select(std::span<const CandidatePath> paths, Rng& rng) {
  if (paths.empty()) throw std::invalid_argument("lb_select: no candidate paths");
  return static_cast<int>(rng.uniform_index(paths.size()));
}

FluidStepResult fluid_step(FluidState& state, const TrafficDemand& demand,
                           std::span<const CandidatePath> paths) {
  if (paths.empty()) throw std::invalid_argument("fluid_step: no candidate paths");

  // Path capacity = min available over its links, weights proportional.
  std::vector<double> path_capacity(paths.size());
  double capacity_sum = 0.0;
  for (std::size_t p = 0; p < paths.size(); ++p) {
    double c = std::numeric_limits<double>::infinity();
    for (int l : paths[p].link_sequence) c = std::min(c, state.available[l]);
    path_capacity[p] = c;
    capacity_sum += c;
  }
  if (capacity_sum <= 0.0) return {0.0, true};

  // Accumulate every path's share on every one of its links, then commit
  // only if nothing goes negative (tiny tolerance for exact fills).
  std::vector<double> subtract(state.available.size(), 0.0);
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const double share = demand.bandwidth * path_capacity[p] / capacity_sum;
    for (int l : paths[p].link_sequence) subtract[l] += share;
  }
  constexpr double kSlack = 1e-9;
  for (std::size_t l = 0; l < subtract.size(); ++l)
    if (state.available[l] - subtract[l] < -kSlack) return {0.0, true};
  for (std::size_t l = 0; l < subtract.size(); ++l)
    state.available[l] = std::max(0.0, state.available[l] - subtract[l]);
  return {static_cast<double>(demand.bandwidth), false};
}

std::optional<Policy> parse_policy(const std::string& name) {
  if (name == "gnn") return Policy::gnn;
  if (name == "lb") return Policy::lb;
  if (name == "fluid") return Policy::fluid;
  return std::nullopt;
}

const char* policy_name(Policy p) {
  switch (p) {
    case Policy::gnn: return "gnn";
    case Policy::lb: return "lb";
    case Policy::fluid: return "fluid";
  }
  return "?";
}

EpisodeResult run_policy_episode(Policy policy, const Topology& topo, const PathTable& table,
                                 std::uint64_t demand_seed, const QNetworkParams* params,
                                 double max_capacity, bool keep_log) {
  if (policy == Policy::gnn && params == nullptr)
    throw std::invalid_argument("run_policy_episode: gnn policy requires trained parameters");

  // Demands draw from their own stream: every policy given the same seed
  // sees the identical demand sequence.
  Rng demand_rng(derive_seed(demand_seed, "demands", 0));
  Rng policy_rng(derive_seed(demand_seed, "policy-choice", 0));

  EpisodeResult result;
  auto [state, demand] = init_env(topo, table, demand_rng, max_capacity);
  FluidState fluid{state.available_all()};

  bool done = false;
  while (!done) {
    const TrafficDemand current = demand;
    const auto& paths = table.paths(current.src, current.dst);
    if (paths.empty())
      throw std::runtime_error("run_policy_episode: demand without candidate paths");

    double reward = 0.0;
    int rank = -1;
    if (policy == Policy::fluid) {
      auto [r, d] = fluid_step(fluid, current, paths);
      reward = r;
      done = d;
      if (!done) demand = generate_demand(topo, demand_rng);
    } else {
      if (policy == Policy::lb) {
        rank = lb_select(paths, policy_rng);
      } else {
        const auto scored = evaluate_actions(topo, state, current, table, *params);
        rank = 0;
        for (std::size_t i = 1; i < scored.size(); ++i)
          if (scored[i].second > scored[rank].second) rank = static_cast<int>(i);
      }
      StepOutcome outcome = step(topo, state, current, paths[rank], demand_rng);
      reward = outcome.reward;
      done = outcome.done;
      if (!done) {
        state = std::move(outcome.next_state);
        demand = outcome.next_demand;
      }
    }

    if (keep_log) {
      result.demands.push_back(current);
      result.log.push_back({result.steps, current.src, current.dst, current.bandwidth, rank,
                            reward > 0.0});
    }
    result.score += reward;
    ++result.steps;
  }
  return result;
}

}  // namespace gnnroute
