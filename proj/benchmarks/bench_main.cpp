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

#include <benchmark/benchmark.h>

#include "gnnroute/agent.hpp"
#include "gnnroute/baselines.hpp"
#include "gnnroute/qnet.hpp"

namespace gnnroute {
namespace {

Topology nsfnet() {
  return Topology("nsfnet", 14,
                  {{0, 1}, {0, 2}, {0, 7},  {1, 2},  {1, 3},  {2, 5},  {3, 4},
                   {3, 10}, {4, 5}, {4, 6},  {5, 9},  {5, 12}, {6, 7},  {7, 8},
                   {8, 9},  {8, 11}, {8, 13}, {10, 11}, {10, 13}, {11, 12}, {12, 13}});
}

Topology geant2() {
  return Topology("geant2", 24,
                  {{0, 1},  {0, 2},  {1, 3},   {1, 6},   {1, 9},   {2, 3},   {2, 4},   {3, 5},
                   {3, 6},  {4, 7},  {4, 11},  {5, 8},   {6, 8},   {6, 9},   {7, 8},   {7, 11},
                   {8, 12}, {8, 17}, {8, 18},  {8, 20},  {9, 10},  {9, 12},  {9, 13},  {10, 13},
                   {11, 14}, {11, 20}, {12, 13}, {12, 19}, {12, 21}, {14, 15}, {15, 16},
                   {16, 17}, {17, 18}, {18, 21}, {19, 23}, {21, 22}, {22, 23}});
}

struct QFixture {
  Topology topo;
  PathTable table;
  QNetworkParams params;
  EnvState state;
  TrafficDemand demand;
  const CandidatePath* action;

  explicit QFixture(Topology t, int hidden = 25, int steps = 8)
      : topo(std::move(t)), table(build_path_table(topo, 4)), params([&] {
          Rng rng(7);
          return QNetworkParams::init({hidden, steps}, rng);
        }()) {
    auto statics = std::make_shared<LinkStatics>();
    statics->max_capacity.assign(topo.link_count(), 200.0);
    statics->betweenness = link_betweenness(topo, table);
    state = EnvState(statics, std::vector<double>(topo.link_count(), 200.0));
    demand = {0, topo.node_count() - 1, 32};
    action = &table.paths(demand.src, demand.dst).front();
  }
};

void BM_QValueForward(benchmark::State& bm_state) {
  static const QFixture fixture(nsfnet());
  for (auto _ : bm_state) {
    benchmark::DoNotOptimize(
        q_value(fixture.topo, fixture.state, fixture.demand, *fixture.action, fixture.params));
  }
}
BENCHMARK(BM_QValueForward);

void BM_QValueForwardGeant2(benchmark::State& bm_state) {
  static const QFixture fixture(geant2());
  for (auto _ : bm_state) {
    benchmark::DoNotOptimize(
        q_value(fixture.topo, fixture.state, fixture.demand, *fixture.action, fixture.params));
  }
}
BENCHMARK(BM_QValueForwardGeant2);

void BM_QGradientsBatch32(benchmark::State& bm_state) {
  static const QFixture fixture(nsfnet());
  std::vector<QTrainingExample> batch(
      32, QTrainingExample{&fixture.state, &fixture.demand, fixture.action, 100.0});
  for (auto _ : bm_state) {
    benchmark::DoNotOptimize(q_gradients(fixture.topo, batch, fixture.params));
  }
}
BENCHMARK(BM_QGradientsBatch32);

void BM_BuildPathTable(benchmark::State& bm_state) {
  const Topology topo = geant2();
  for (auto _ : bm_state) {
    benchmark::DoNotOptimize(build_path_table(topo, 4));
  }
}
BENCHMARK(BM_BuildPathTable);

void BM_KShortestPaths(benchmark::State& bm_state) {
  const Topology topo = geant2();
  for (auto _ : bm_state) {
    benchmark::DoNotOptimize(k_shortest_paths(topo, 0, 23, 4));
  }
}
BENCHMARK(BM_KShortestPaths);

void BM_LbEpisode(benchmark::State& bm_state) {
  const Topology topo = nsfnet();
  const PathTable table = build_path_table(topo, 4);
  std::uint64_t seed = 0;
  for (auto _ : bm_state) {
    benchmark::DoNotOptimize(run_policy_episode(Policy::lb, topo, table, ++seed));
  }
}
BENCHMARK(BM_LbEpisode);

void BM_FluidEpisode(benchmark::State& bm_state) {
  const Topology topo = nsfnet();
  const PathTable table = build_path_table(topo, 4);
  std::uint64_t seed = 0;
  for (auto _ : bm_state) {
    benchmark::DoNotOptimize(run_policy_episode(Policy::fluid, topo, table, ++seed));
  }
}
BENCHMARK(BM_FluidEpisode);

void BM_GreedyGnnEpisode(benchmark::State& bm_state) {
  static const QFixture fixture(nsfnet());
  std::uint64_t seed = 0;
  for (auto _ : bm_state) {
    benchmark::DoNotOptimize(
        run_policy_episode(Policy::gnn, fixture.topo, fixture.table, ++seed, &fixture.params));
  }
}
BENCHMARK(BM_GreedyGnnEpisode);

}  // namespace
}  // namespace gnnroute

BENCHMARK_MAIN();
