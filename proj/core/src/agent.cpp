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

#include "gnnroute/agent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gnnroute/baselines.hpp"
#include "gnnroute/parallel.hpp"

namespace gnnroute {

double epsilon_at(int episode, const AgentConfig& cfg) {
  if (episode < cfg.epsilon_hold_episodes) return cfg.epsilon_start;
  const int ticks = (episode - cfg.epsilon_hold_episodes) / cfg.epsilon_decay_period;
  return std::max(cfg.epsilon_min, cfg.epsilon_start * std::pow(cfg.epsilon_decay_rate, ticks));
}

std::vector<std::pair<int, double>> evaluate_actions(const Topology& topo, const EnvState& state,
                                                     const TrafficDemand& demand,
                                                     const PathTable& table,
                                                     const QNetworkParams& params) {
  const auto& paths = table.paths(demand.src, demand.dst);
  if (paths.empty())
    throw std::runtime_error("evaluate_actions: demand has no candidate paths (src " +
                             std::to_string(demand.src) + ", dst " + std::to_string(demand.dst) +
                             ")");
  std::vector<std::pair<int, double>> out(paths.size());
  // Candidate forward passes are independent; worth spreading only when the
  // per-pass cost dominates the thread handoff.
  const auto evaluate_one = [&](std::size_t rank) {
    const EnvState tentative = force_allocate(state, paths[rank], demand.bandwidth);
    out[rank] = {static_cast<int>(rank),
                 q_value(topo, tentative, demand, paths[rank], params)};
  };
  if (paths.size() > 1 && worker_count() > 1) {
    parallel_for(paths.size(), evaluate_one);
  } else {
    for (std::size_t rank = 0; rank < paths.size(); ++rank) evaluate_one(rank);
  }
  return out;
}

int select_action(std::span<const double> q_values, double epsilon, Rng& rng) {
  if (q_values.empty()) throw std::invalid_argument("select_action: no actions");
  if (rng.uniform() < epsilon) return static_cast<int>(rng.uniform_index(q_values.size()));
  int best = 0;
  for (std::size_t i = 1; i < q_values.size(); ++i)
    if (q_values[i] > q_values[best]) best = static_cast<int>(i);
  return best;
}

namespace {

int argmax_rank(const std::vector<std::pair<int, double>>& scored) {
  int best = 0;
  for (std::size_t i = 1; i < scored.size(); ++i)
    if (scored[i].second > scored[best].second) best = static_cast<int>(i);
  return scored[best].first;
}

}  // namespace

double bellman_target(const Topology& topo, const Transition& tr, const PathTable& table,
                      const QNetworkParams& params, double gamma) {
  if (tr.done) return tr.reward;
  const auto scored = evaluate_actions(topo, tr.next_state, tr.next_demand, table, params);
  double best = scored.front().second;
  for (const auto& [rank, q] : scored) best = std::max(best, q);
  return tr.reward + gamma * best;
}

ReplayStats replay_train(const Topology& topo, const PathTable& table, const ReplayBuffer& buffer,
                         QNetworkParams& params, NesterovOptimizer& opt, const AgentConfig& cfg,
                         Rng& rng, const QNetworkParams* target_params) {
  ReplayStats stats;
  if (buffer.size() < static_cast<std::size_t>(cfg.batch_size)) {
    stats.skipped = true;
    return stats;
  }

  auto param_refs = params.parameter_refs();
  double loss_sum = 0.0;
  for (int b = 0; b < cfg.batches_per_replay; ++b) {
    // Uniform with replacement; indices drawn sequentially so the stream is
    // independent of any parallel work below.
    std::vector<std::size_t> picks(cfg.batch_size);
    for (auto& p : picks) p = rng.uniform_index(buffer.size());

    const QNetworkParams& value_net = target_params ? *target_params : params;
    std::vector<double> targets(picks.size());
    parallel_for(picks.size(), [&](std::size_t j) {
      targets[j] = bellman_target(topo, buffer.at(picks[j]), table, value_net, cfg.gamma);
    });

    std::vector<QTrainingExample> batch(picks.size());
    for (std::size_t j = 0; j < picks.size(); ++j) {
      const Transition& tr = buffer.at(picks[j]);
      const auto& paths = table.paths(tr.demand.src, tr.demand.dst);
      batch[j] = {&tr.state, &tr.demand, &paths[tr.action_rank], targets[j]};
    }
    // The stored action was evaluated on its tentative post-allocation
    // state; regress q on that same input.
    std::vector<EnvState> tentative(batch.size());
    for (std::size_t j = 0; j < batch.size(); ++j) {
      tentative[j] = force_allocate(*batch[j].state, *batch[j].action, batch[j].demand->bandwidth);
      batch[j].state = &tentative[j];
    }

    QBatchResult result = q_gradients(topo, batch, params);
    auto grad_refs = result.grads.parameter_refs();
    if (cfg.grad_clip_norm > 0.0) {
      double sq = 0.0;
      for (const auto& block : grad_refs)
        for (double g : block.values) sq += g * g;
      const double norm = std::sqrt(sq);
      if (norm > cfg.grad_clip_norm) {
        const double scale = cfg.grad_clip_norm / norm;
        for (auto& block : grad_refs)
          for (double& g : block.values) g *= scale;
      }
    }
    opt.step(param_refs, grad_refs);
    loss_sum += result.mse;
    ++stats.batches;
  }
  stats.mean_loss = loss_sum / stats.batches;
  return stats;
}

TrainResult train(const Topology& topo, const PathTable& table, const AgentConfig& cfg,
                  std::uint64_t master_seed,
                  const std::function<void(const TrainLogRow&)>& on_episode,
                  const std::atomic<bool>* stop, const QNetworkParams* warm_start) {
  Rng init_rng(derive_seed(master_seed, "init", 0));
  QNetworkParams params =
      warm_start ? *warm_start
                 : QNetworkParams::init({cfg.hidden_size, cfg.msg_steps}, init_rng);
  NesterovOptimizer opt(cfg.learning_rate, cfg.momentum);
  ReplayBuffer buffer;
  Rng loop_rng(derive_seed(master_seed, "loop", 0));

  std::optional<QNetworkParams> target;
  if (cfg.use_target_network) target = params;

  TrainResult result;
  result.log.reserve(cfg.training_episodes);

  for (int episode = 0; episode < cfg.training_episodes; ++episode) {
    if (stop && stop->load()) {
      result.interrupted = true;
      break;
    }
    const double eps = epsilon_at(episode, cfg);
    auto [state, demand] = init_env(topo, table, loop_rng, cfg.max_link_capacity);
    double score = 0.0;
    bool done = false;
    while (!done) {
      const auto& paths = table.paths(demand.src, demand.dst);
      if (paths.empty())
        throw std::runtime_error("train: demand without candidate paths on " + topo.name());
      // Exploration decided before any q evaluation: random steps skip the
      // k forward passes without touching the random stream layout.
      int rank;
      if (loop_rng.uniform() < eps) {
        rank = static_cast<int>(loop_rng.uniform_index(paths.size()));
      } else {
        rank = argmax_rank(evaluate_actions(topo, state, demand, table, params));
      }
      StepOutcome outcome = step(topo, state, demand, paths[rank], loop_rng);
      buffer.push({state, demand, rank, outcome.reward, outcome.next_state, outcome.next_demand,
                   outcome.done});
      score += outcome.reward;
      done = outcome.done;
      if (!done) {
        state = std::move(outcome.next_state);
        demand = outcome.next_demand;
      }
    }

    TrainLogRow row;
    row.episode = episode;
    row.epsilon = eps;
    row.episode_score = score;

    if ((episode + 1) % cfg.replay_period == 0) {
      ReplayStats stats = replay_train(topo, table, buffer, params, opt, cfg, loop_rng,
                                       target ? &*target : nullptr);
      if (!stats.skipped) row.loss_mean = stats.mean_loss;
    }
    if (target && (episode + 1) % cfg.target_update_episodes == 0) *target = params;

    if (cfg.eval_period > 0 && (episode + 1) % cfg.eval_period == 0 && cfg.eval_episodes > 0) {
      // Frozen-parameter greedy sweep; the same derived seeds every sweep so
      // successive checkpoints are scored on identical demand sequences.
      std::vector<double> scores(cfg.eval_episodes);
      parallel_for(scores.size(), [&](std::size_t i) {
        scores[i] = run_policy_episode(Policy::gnn, topo, table,
                                       derive_seed(master_seed, "train-eval", i), &params,
                                       cfg.max_link_capacity)
                        .score;
      });
      double mean = 0.0;
      for (double s : scores) mean += s;
      mean /= scores.size();
      row.eval_mean = mean;
      if (result.best_eval_episode < 0 || mean > result.best_eval_mean) {
        result.best_eval_mean = mean;
        result.best_eval_episode = episode;
        result.best_params = params;
      }
    }

    if (on_episode) on_episode(row);
    result.log.push_back(std::move(row));
  }

  result.final_params = params;
  if (result.best_eval_episode < 0) {
    result.best_params = std::move(params);
    result.best_eval_mean = 0.0;
  }
  return result;
}

}  // namespace gnnroute
