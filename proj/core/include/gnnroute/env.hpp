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

#include <array>
#include <memory>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "gnnroute/paths.hpp"
#include "gnnroute/rng.hpp"
#include "gnnroute/topology.hpp"

namespace gnnroute {

/// Demand sizes in ODU0 units.
inline constexpr std::array<int, 3> kDemandSizes{8, 32, 64};
inline constexpr double kDefaultLinkCapacity = 200.0;  // ODU0 per link

/// Index of a bandwidth value in kDemandSizes. Throws std::invalid_argument
/// for anything outside {8, 32, 64}.
int demand_size_index(int bandwidth);

struct TrafficDemand {
  int src = -1;
  int dst = -1;
  int bandwidth = 0;

  bool valid() const { return src >= 0 && dst >= 0 && src != dst && bandwidth > 0; }
  bool operator==(const TrafficDemand&) const = default;
};

/// Per-link quantities that stay constant within an episode.
struct LinkStatics {
  std::vector<double> max_capacity;
  std::vector<double> betweenness;
};

/// The MDP state: per-link available capacity plus shared static features.
/// Value type; copying snapshots the capacity vector while sharing the
/// immutable statics.
class EnvState {
 public:
  EnvState() = default;
  EnvState(std::shared_ptr<const LinkStatics> statics, std::vector<double> available)
      : statics_(std::move(statics)), available_(std::move(available)) {}

  int link_count() const { return static_cast<int>(available_.size()); }
  double available(int link) const { return available_[link]; }
  double max_capacity(int link) const { return statics_->max_capacity[link]; }
  double betweenness(int link) const { return statics_->betweenness[link]; }

  const std::vector<double>& available_all() const { return available_; }
  const std::shared_ptr<const LinkStatics>& statics() const { return statics_; }

  /// Mutable access for the allocation primitives below.
  std::vector<double>& available_mut() { return available_; }

 private:
  std::shared_ptr<const LinkStatics> statics_;
  std::vector<double> available_;
};

struct StepOutcome {
  double reward = 0.0;
  bool done = false;
  EnvState next_state;
  TrafficDemand next_demand;  // sentinel (invalid) when done
};

/// Fresh episode state: all links at maximum capacity, betweenness computed
/// from the path table, and the first demand drawn.
std::pair<EnvState, TrafficDemand> init_env(const Topology& topo, const PathTable& table,
                                            Rng& rng, double max_capacity = kDefaultLinkCapacity);

/// Uniform demand: ordered (src, dst) pair with src != dst, bandwidth from
/// kDemandSizes. Consumes exactly three draws so policy choices can never
/// shift the demand sequence.
TrafficDemand generate_demand(const Topology& topo, Rng& rng);

/// Subtracts bw from every link on the path when all of them have at least
/// bw available; otherwise returns nullopt and reports the first
/// insufficient link via blocked_link. Capacity is shared across both
/// directions, so paths in either direction draw from the same pool.
std::optional<EnvState> try_allocate(const EnvState& state, const CandidatePath& path, double bw,
                                     int* blocked_link = nullptr);

/// Unconditional subtraction used for tentative action evaluation; the
/// result may carry negative capacities and is never installed as the live
/// state.
EnvState force_allocate(const EnvState& state, const CandidatePath& path, double bw);

/// One MDP step: allocate `demand` along `action_path`. On success the reward
/// is the demand bandwidth and the next demand is drawn from rng; on failure
/// the episode is done with reward 0 and the state unchanged. Throws
/// std::invalid_argument when the path does not join the demand endpoints.
StepOutcome step(const Topology& topo, const EnvState& state, const TrafficDemand& demand,
                 const CandidatePath& action_path, Rng& rng);

/// One row of an episode log.
struct EpisodeLogRow {
  int step = 0;
  int src = -1;
  int dst = -1;
  int bandwidth = 0;
  int action_rank = -1;  // -1 for policies without a discrete path choice
  bool success = false;
};

void write_episode_log_csv(std::ostream& out, const std::vector<EpisodeLogRow>& rows);

}  // namespace gnnroute
