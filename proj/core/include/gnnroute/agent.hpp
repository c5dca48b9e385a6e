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

#include <atomic>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gnnroute/env.hpp"
#include "gnnroute/qnet.hpp"

namespace gnnroute {

/// One replay-buffer record.
struct Transition {
  EnvState state;
  TrafficDemand demand;
  int action_rank = -1;
  double reward = 0.0;
  EnvState next_state;
  TrafficDemand next_demand;  // sentinel when done
  bool done = false;
};

/// FIFO experience store: once full, the oldest record is evicted.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 5000) : capacity_(capacity) {}

  void push(Transition tr) {
    if (items_.size() == capacity_) items_.pop_front();
    items_.push_back(std::move(tr));
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return items_[i]; }  // oldest first

 private:
  std::deque<Transition> items_;
  std::size_t capacity_;
};

struct AgentConfig {
  double gamma = 0.95;
  double epsilon_start = 1.0;
  int epsilon_hold_episodes = 10;   // epsilon stays at start for this many episodes
  double epsilon_decay_rate = 0.995;
  int epsilon_decay_period = 2;     // episodes per decay tick after the hold
  double epsilon_min = 0.01;
  int replay_period = 2;            // episodes between replay training rounds
  int batches_per_replay = 5;
  int batch_size = 32;
  int k = 4;                        // candidate paths per demand
  int training_episodes = 1000;
  int eval_period = 100;            // episodes between greedy evaluation sweeps
  int eval_episodes = 50;
  int hidden_size = 25;
  int msg_steps = 8;
  double learning_rate = 1e-4;
  double momentum = 0.9;
  // Bellman errors early in training are orders of magnitude above the
  // feature scale; the 8-step recurrent unroll amplifies them into weight
  // explosions without a ceiling on the update. 0 disables clipping.
  double grad_clip_norm = 2.0;
  double max_link_capacity = kDefaultLinkCapacity;
  // Optional stabilization: hold Bellman targets on a periodically refreshed
  // copy of the network instead of the live parameters.
  bool use_target_network = false;
  int target_update_episodes = 50;
};

/// Exploration schedule: epsilon_start for the hold window, then exponential
/// decay every epsilon_decay_period episodes, floored at epsilon_min.
double epsilon_at(int episode, const AgentConfig& cfg);

/// Scores every candidate path for the demand: each path's q is computed on
/// the tentative post-allocation state (unchecked subtraction; the action
/// features encode the attempted allocation). Throws std::invalid_argument
/// when the demand has no candidate paths.
std::vector<std::pair<int, double>> evaluate_actions(const Topology& topo, const EnvState& state,
                                                     const TrafficDemand& demand,
                                                     const PathTable& table,
                                                     const QNetworkParams& params);

/// Epsilon-greedy choice over candidate ranks: uniform with probability
/// epsilon, otherwise the argmax (ties resolve to the lowest rank).
int select_action(std::span<const double> q_values, double epsilon, Rng& rng);

/// Bellman target: reward for terminal transitions, otherwise
/// reward + gamma * max_a' q(next_state, next_demand, a').
double bellman_target(const Topology& topo, const Transition& tr, const PathTable& table,
                      const QNetworkParams& params, double gamma);

struct ReplayStats {
  int batches = 0;
  double mean_loss = 0.0;
  bool skipped = false;  // buffer below one batch
};

/// One replay round: batches_per_replay times, sample batch_size transitions
/// uniformly with replacement, compute Bellman targets with the current
/// parameters, and apply one optimizer step on the MSE gradients. No-op when
/// the buffer holds fewer than batch_size records.
ReplayStats replay_train(const Topology& topo, const PathTable& table, const ReplayBuffer& buffer,
                         QNetworkParams& params, NesterovOptimizer& opt, const AgentConfig& cfg,
                         Rng& rng, const QNetworkParams* target_params = nullptr);

struct TrainLogRow {
  int episode = 0;
  double epsilon = 1.0;
  double episode_score = 0.0;
  std::optional<double> loss_mean;  // present when a replay round ran this episode
  std::optional<double> eval_mean;  // present on evaluation-sweep episodes
};

struct TrainResult {
  QNetworkParams best_params;   // highest evaluation mean
  QNetworkParams final_params;
  std::vector<TrainLogRow> log;
  double best_eval_mean = 0.0;
  int best_eval_episode = -1;
  bool interrupted = false;
};

/// The full training loop: per episode, evaluate the k candidate actions,
/// pick epsilon-greedily, step the environment, store the transition, run a
/// replay round every replay_period episodes, and every eval_period episodes
/// sweep eval_episodes greedy episodes with frozen parameters (the highest
/// sweep mean decides best_params). Fully deterministic for a given seed.
/// `stop` (optional) is polled at episode boundaries so a run can be
/// interrupted cleanly; `on_episode` observes each log row as it is made.
TrainResult train(const Topology& topo, const PathTable& table, const AgentConfig& cfg,
                  std::uint64_t master_seed,
                  const std::function<void(const TrainLogRow&)>& on_episode = {},
                  const std::atomic<bool>* stop = nullptr,
                  const QNetworkParams* warm_start = nullptr);

}  // namespace gnnroute
