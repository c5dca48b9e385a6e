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

#include "gnnroute/env.hpp"

#include <stdexcept>

#include "gnnroute/csvio.hpp"

namespace gnnroute {

int demand_size_index(int bandwidth) {
  for (std::size_t i = 0; i < kDemandSizes.size(); ++i)
    if (kDemandSizes[i] == bandwidth) return static_cast<int>(i);
  throw std::invalid_argument("invalid demand bandwidth: " + std::to_string(bandwidth));
}

std::pair<EnvState, TrafficDemand> init_env(const Topology& topo, const PathTable& table, Rng& rng,
                                            double max_capacity) {
  auto statics = std::make_shared<LinkStatics>();
  statics->max_capacity.assign(topo.link_count(), max_capacity);
  statics->betweenness = link_betweenness(topo, table);
  EnvState state(std::move(statics), std::vector<double>(topo.link_count(), max_capacity));
  TrafficDemand demand = generate_demand(topo, rng);
  return {std::move(state), demand};
}

TrafficDemand generate_demand(const Topology& topo, Rng& rng) {
  const int n = topo.node_count();
  TrafficDemand demand;
  demand.src = static_cast<int>(rng.uniform_index(n));
  demand.dst = static_cast<int>(rng.uniform_index(n - 1));
  if (demand.dst >= demand.src) ++demand.dst;
  demand.bandwidth = kDemandSizes[rng.uniform_index(kDemandSizes.size())];
  return demand;
}

std::optional<EnvState> try_allocate(const EnvState& state, const CandidatePath& path, double bw,
                                     int* blocked_link) {
  for (int l : path.link_sequence) {
    if (state.available(l) < bw) {
      if (blocked_link) *blocked_link = l;
      return std::nullopt;
    }
  }
  EnvState next = state;
  for (int l : path.link_sequence) next.available_mut()[l] -= bw;
  if (blocked_link) *blocked_link = -1;
  return next;
}

EnvState force_allocate(const EnvState& state, const CandidatePath& path, double bw) {
  EnvState next = state;
  for (int l : path.link_sequence) next.available_mut()[l] -= bw;
  return next;
}

StepOutcome step(const Topology& topo, const EnvState& state, const TrafficDemand& demand,
                 const CandidatePath& action_path, Rng& rng) {
  if (action_path.src() != demand.src || action_path.dst() != demand.dst)
    throw std::invalid_argument("step: action path does not join the demand endpoints");

  StepOutcome outcome;
  auto next = try_allocate(state, action_path, demand.bandwidth);
  if (!next) {
    outcome.reward = 0.0;
    outcome.done = true;
    outcome.next_state = state;
    outcome.next_demand = TrafficDemand{};  // sentinel
    return outcome;
  }
  outcome.reward = demand.bandwidth;
  outcome.done = false;
  outcome.next_state = std::move(*next);
  outcome.next_demand = generate_demand(topo, rng);
  return outcome;
}

void write_episode_log_csv(std::ostream& out, const std::vector<EpisodeLogRow>& rows) {
  write_csv_row(out, {"step", "src", "dst", "bw", "action_rank", "success"});
  for (const auto& row : rows) {
    write_csv_row(out, {std::to_string(row.step), std::to_string(row.src), std::to_string(row.dst),
                        std::to_string(row.bandwidth), std::to_string(row.action_rank),
                        row.success ? "1" : "0"});
  }
}

}  // namespace gnnroute
