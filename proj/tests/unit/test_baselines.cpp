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

#include <doctest.h>

#include <cmath>

#include "gnnroute/baselines.hpp"
#include "test_support.hpp"

using namespace gnnroute;
using namespace gnnroute::testing;

TEST_CASE("lb_select is uniform and reproducible") {
  const Topology topo = nsfnet_topology();
  const PathTable table = build_path_table(topo, 4);
  const auto& paths = table.paths(0, 13);
  REQUIRE(paths.size() == 4);

  SUBCASE("single candidate returns rank 0") {
    Rng rng(1);
    CHECK(lb_select({paths.data(), 1}, rng) == 0);
  }
  SUBCASE("frequencies approach 1/4") {
    Rng rng(2);
    std::vector<int> counts(4, 0);
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) ++counts[lb_select(paths, rng)];
    for (int c : counts) CHECK(std::abs(c / static_cast<double>(draws) - 0.25) < 0.02);
  }
  SUBCASE("same seed, same sequence") {
    Rng a(77), b(77);
    for (int i = 0; i < 100; ++i) CHECK(lb_select(paths, a) == lb_select(paths, b));
  }
}

TEST_CASE("fluid splits proportionally to path capacity") {
  // two link-disjoint 2-hop routes between 0 and 3
  const Topology topo("twopaths", 4, {{0, 1}, {1, 3}, {0, 2}, {2, 3}});
  const PathTable table = build_path_table(topo, 4);
  const auto& paths = table.paths(0, 3);
  REQUIRE(paths.size() == 2);  // 0-1-3 and 0-2-3

  FluidState state{std::vector<double>(4, 0.0)};
  // path 0-1-3 at min capacity 100, path 0-2-3 at 60
  for (int l : paths[0].link_sequence) state.available[l] = 100.0;
  for (int l : paths[1].link_sequence) state.available[l] = 60.0;

  const TrafficDemand demand{0, 3, 64};
  const auto [reward, done] = fluid_step(state, demand, paths);
  CHECK(reward == doctest::Approx(64.0));
  CHECK_FALSE(done);
  // shares: 64 * 100/160 = 40 and 64 * 60/160 = 24
  for (int l : paths[0].link_sequence) CHECK(state.available[l] == doctest::Approx(60.0));
  for (int l : paths[1].link_sequence) CHECK(state.available[l] == doctest::Approx(36.0));
}

TEST_CASE("fluid with one candidate path routes everything on it") {
  const Topology topo("pair", 2, {{0, 1}});
  const PathTable table = build_path_table(topo, 4);
  FluidState state{{200.0}};
  const auto [reward, done] = fluid_step(state, {0, 1, 32}, table.paths(0, 1));
  CHECK(reward == doctest::Approx(32.0));
  CHECK_FALSE(done);
  CHECK(state.available[0] == doctest::Approx(168.0));
}

TEST_CASE("fluid ends the episode when capacity runs out") {
  const Topology topo = triangle_topology();
  const PathTable table = build_path_table(topo, 2);
  SUBCASE("all path capacities zero") {
    FluidState state{{0.0, 0.0, 0.0}};
    const auto [reward, done] = fluid_step(state, {0, 1, 8}, table.paths(0, 1));
    CHECK(done);
    CHECK(reward == doctest::Approx(0.0));
  }
  SUBCASE("a link would go negative; state unchanged") {
    // direct link nearly full, detour empty: the split pushes the direct
    // link below zero
    FluidState state{{0.0, 0.0, 0.0}};
    const int direct = topo.link_between(0, 1);
    state.available[direct] = 4.0;
    const auto before = state.available;
    const auto [reward, done] = fluid_step(state, {0, 1, 64}, table.paths(0, 1));
    CHECK(done);
    CHECK(reward == doctest::Approx(0.0));
    CHECK(state.available == before);
  }
}

TEST_CASE("fluid conservation: subtracted volume equals bw * sum(w_p * hops_p)") {
  Rng rng(4021);
  for (int trial = 0; trial < 10; ++trial) {
    const Topology topo = random_connected_topology(6, 4, rng);
    const PathTable table = build_path_table(topo, 4);
    FluidState state{std::vector<double>(topo.link_count(), 200.0)};
    Rng demand_rng(trial);
    for (int step = 0; step < 30; ++step) {
      const TrafficDemand demand = generate_demand(topo, demand_rng);
      const auto& paths = table.paths(demand.src, demand.dst);
      // expected volume from the definition
      std::vector<double> capacity(paths.size());
      double cap_sum = 0.0;
      for (std::size_t p = 0; p < paths.size(); ++p) {
        double c = 1e300;
        for (int l : paths[p].link_sequence) c = std::min(c, state.available[l]);
        capacity[p] = c;
        cap_sum += c;
      }
      const auto before = state.available;
      const auto [reward, done] = fluid_step(state, demand, paths);
      if (done) break;
      double expected = 0.0;
      for (std::size_t p = 0; p < paths.size(); ++p)
        expected += demand.bandwidth * capacity[p] / cap_sum * paths[p].hop_count();
      double subtracted = 0.0;
      for (std::size_t l = 0; l < before.size(); ++l) subtracted += before[l] - state.available[l];
      CHECK(subtracted == doctest::Approx(expected));
      CHECK(reward == doctest::Approx(demand.bandwidth));
    }
  }
}

TEST_CASE("policies given one seed face identical demand sequences") {
  const Topology topo = nsfnet_topology();
  const PathTable table = build_path_table(topo, 4);
  Rng rng(5150);
  QNetworkParams params = random_qnetwork({6, 2}, rng);

  const std::uint64_t seed = 909;
  const EpisodeResult gnn =
      run_policy_episode(Policy::gnn, topo, table, seed, &params, 200.0, true);
  const EpisodeResult lb = run_policy_episode(Policy::lb, topo, table, seed, nullptr, 200.0, true);
  const EpisodeResult fluid =
      run_policy_episode(Policy::fluid, topo, table, seed, nullptr, 200.0, true);

  const std::size_t common =
      std::min({gnn.demands.size(), lb.demands.size(), fluid.demands.size()});
  REQUIRE(common > 0);
  for (std::size_t i = 0; i < common; ++i) {
    CHECK(gnn.demands[i] == lb.demands[i]);
    CHECK(gnn.demands[i] == fluid.demands[i]);
  }

  // reruns reproduce bit-identical scores
  CHECK(run_policy_episode(Policy::lb, topo, table, seed).score == lb.score);
  CHECK(run_policy_episode(Policy::fluid, topo, table, seed).score == fluid.score);
  CHECK(run_policy_episode(Policy::gnn, topo, table, seed, &params).score == gnn.score);

  CHECK(fluid.score >= 0.0);
  // scores are sums of accepted demand sizes
  for (const EpisodeResult* r : {&gnn, &lb, &fluid})
    CHECK(r->score == doctest::Approx(8.0 * std::round(r->score / 8.0)));
}

TEST_CASE("on a single-link topology every policy fills the pipe with 8-unit demands") {
  const Topology topo("pair", 2, {{0, 1}});
  const PathTable table = build_path_table(topo, 4);
  const auto& paths = table.paths(0, 1);

  // integral policies: 25 allocations of 8 fill the 200-unit link
  auto statics = std::make_shared<LinkStatics>();
  statics->max_capacity = {200.0};
  statics->betweenness = link_betweenness(topo, table);
  EnvState state(statics, {200.0});
  double integral_score = 0.0;
  for (;;) {
    auto next = try_allocate(state, paths.front(), 8.0);
    if (!next) break;
    state = std::move(*next);
    integral_score += 8.0;
  }
  CHECK(integral_score == doctest::Approx(200.0));

  // fluid sees the same total
  FluidState fluid{{200.0}};
  double fluid_score = 0.0;
  for (;;) {
    const auto [reward, done] = fluid_step(fluid, {0, 1, 8}, paths);
    if (done) break;
    fluid_score += reward;
  }
  CHECK(fluid_score == doctest::Approx(200.0));

  // single candidate: lb and fluid behave identically on a shared sequence
  const std::uint64_t seed = 33;
  CHECK(run_policy_episode(Policy::lb, topo, table, seed).score ==
        doctest::Approx(run_policy_episode(Policy::fluid, topo, table, seed).score));
}

TEST_CASE("policy names parse both ways") {
  CHECK(parse_policy("gnn") == Policy::gnn);
  CHECK(parse_policy("lb") == Policy::lb);
  CHECK(parse_policy("fluid") == Policy::fluid);
  CHECK_FALSE(parse_policy("??").has_value());
  CHECK(std::string(policy_name(Policy::fluid)) == "fluid");
}
