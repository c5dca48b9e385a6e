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

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gnnroute/env.hpp"
#include "gnnroute/nn.hpp"
#include "gnnroute/paths.hpp"
#include "gnnroute/topology.hpp"

namespace gnnroute {

/// Link feature layout, row l of the initial hidden states:
///   [ available/max, betweenness, onehot(8), onehot(32), onehot(64), 0... ]
/// The one-hot slots are nonzero only on links of the action path. Bumped
/// whenever the layout changes so older checkpoints are rejected.
inline constexpr int kFeatureLayoutVersion = 1;
inline constexpr int kLinkFeatureCount = 5;

struct QNetworkConfig {
  int hidden_size = 25;  // H, must be >= kLinkFeatureCount
  int msg_steps = 8;     // T, message-passing iterations
};

/// All learnable weights of the q-value estimator: the message function
/// (2H -> H selu, H -> H linear), the gated recurrent state update, and the
/// readout (H -> H selu, H -> 1 linear) applied to the element-wise sum of
/// final link states.
struct QNetworkParams {
  int hidden_size = 0;
  int msg_steps = 0;
  DenseLayer msg_hidden;
  DenseLayer msg_out;
  RecurrentCell update;
  DenseLayer readout_hidden;
  DenseLayer readout_out;

  static QNetworkParams init(const QNetworkConfig& config, Rng& rng);

  std::vector<ParamRef> parameter_refs();
  std::vector<ConstParamRef> const_parameter_refs() const;
};

/// Gradients mirroring QNetworkParams block for block.
struct QNetworkGrads {
  DenseGrads msg_hidden;
  DenseGrads msg_out;
  RecurrentGrads update;
  DenseGrads readout_hidden;
  DenseGrads readout_out;

  static QNetworkGrads zeros_like(const QNetworkParams& params);
  std::vector<ParamRef> parameter_refs();
  void add(const QNetworkGrads& other);
  void scale(double factor);
};

/// L x H matrix of link hidden states.
using HiddenStates = Mat;

/// Initial hidden states per the feature layout above, zero-padded to H.
/// Throws std::invalid_argument when hidden_size < kLinkFeatureCount.
HiddenStates init_hidden_states(const EnvState& state, const CandidatePath& action,
                                const TrafficDemand& demand, int hidden_size);

/// One synchronous message-passing step: every link aggregates messages from
/// its adjacent links (empty neighborhoods receive the zero message) and
/// updates its state through the recurrent cell. Reads only pre-step states.
void message_pass(HiddenStates& hidden, const std::vector<std::vector<int>>& link_adjacency,
                  const QNetworkParams& params);

/// q(s, a): initial states -> T message-passing steps -> element-wise sum of
/// link states -> readout. Deterministic (fixed reduction order). Throws
/// std::invalid_argument when the action path does not join the demand
/// endpoints.
double q_value(const Topology& topo, const EnvState& state, const TrafficDemand& demand,
               const CandidatePath& action, const QNetworkParams& params);

/// One training example: q(state, demand, action) regressed towards target.
struct QTrainingExample {
  const EnvState* state = nullptr;
  const TrafficDemand* demand = nullptr;
  const CandidatePath* action = nullptr;
  double target = 0.0;
};

/// Mean-squared-error loss over the batch and exact reverse-mode gradients
/// averaged over the batch. Samples are processed in parallel; gradients are
/// reduced in sample order, so the result is deterministic.
struct QBatchResult {
  QNetworkGrads grads;
  double mse = 0.0;
};

QBatchResult q_gradients(const Topology& topo, std::span<const QTrainingExample> batch,
                         const QNetworkParams& params);

/// Checkpoint save/load on top of the parameter container format. The header
/// records H, T and the feature-layout version; loading rejects layout or
/// shape mismatches. `extra_fields` lets callers persist run metadata.
void save_qnetwork(const std::filesystem::path& file, const QNetworkParams& params,
                   const std::map<std::string, std::string>& extra_fields = {});

struct LoadedQNetwork {
  QNetworkParams params;
  std::map<std::string, std::string> fields;
};

LoadedQNetwork load_qnetwork(const std::filesystem::path& file);

}  // namespace gnnroute
