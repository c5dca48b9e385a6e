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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gnnroute/env.hpp"
#include "gnnroute/qnet.hpp"

namespace gnnroute {

/// Load balancing: uniform choice among the candidate paths. Returns the
/// chosen rank.
int lb_select(std::span<const CandidatePath> paths, Rng& rng);

/// Fluid-model capacity state: fractional allocations permitted.
struct FluidState {
  std::vector<double> available;
};

struct FluidStepResult {
  double reward = 0.0;
  bool done = false;
};

/// Theoretical fluid reference: the demand is split across the candidate
/// paths proportionally to their available capacity (min over path links).
/// Every link of path p absorbs bw*w_p; links shared by several candidates
/// accumulate all shares. The step fails (episode done, state unchanged)
/// when all path capacities are zero or some link would go negative.
FluidStepResult fluid_step(FluidState& state, const TrafficDemand& demand,
                           std::span<const CandidatePath> paths);

enum class Policy { gnn, lb, fluid };

/// Parses "gnn" | "lb" | "fluid"; nullopt otherwise.
std::optional<Policy> parse_policy(const std::string& name);
const char* policy_name(Policy p);

struct EpisodeResult {
  double score = 0.0;
  int steps = 0;
  std::vector<EpisodeLogRow> log;        // filled when keep_log
  std::vector<TrafficDemand> demands;    // filled when keep_log
};

/// Runs one full episode under the policy. The demand sequence is a pure
/// function of demand_seed, so different policies given the same seed face
/// identical demands; policy-internal randomness draws from a separate
/// stream. policy == gnn requires trained parameters (greedy action choice).
EpisodeResult run_policy_episode(Policy policy, const Topology& topo, const PathTable& table,
                                 std::uint64_t demand_seed,
                                 const QNetworkParams* params = nullptr,
                                 double max_capacity = kDefaultLinkCapacity,
                                 bool keep_log = false);

}  // namespace gnnroute
