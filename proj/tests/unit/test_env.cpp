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

#include <map>
#include <numeric>
#include <sstream>

#include "gnnroute/env.hpp"
#include "test_support.hpp"

using namespace gnnroute;
using namespace gnnroute::testing;

TEST_CASE("init_env starts every link at maximum capacity") {
  const Topology topo = triangle_topology();
  const PathTable table = build_path_table(topo, 2);
  Rng rng(1);
  auto [state, demand] = init_env(topo, table, rng, 200.0);
  for (int l = 0; l < 3; ++l) {
    CHECK(state.available(l) == doctest::Approx(200.0));
    CHECK(state.max_capacity(l) == doctest::Approx(200.0));
    CHECK(state.betweenness(l) == doctest::Approx(0.5));  // triangle, k=2
  }
  CHECK(demand.valid());
  CHECK((demand.bandwidth == 8 || demand.bandwidth == 32 || demand.bandwidth == 64));
}

TEST_CASE("same seed gives the same first demand") {
  const Topology topo = nsfnet_topology();
  const PathTable table = build_path_table(topo, 4);
  Rng a(42), b(42);
  auto [sa, da] = init_env(topo, table, a);
  auto [sb, db] = init_env(topo, table, b);
  CHECK(da == db);
}

TEST_CASE("demand generation is uniform over sizes and ordered pairs") {
  const Topology topo = nsfnet_topology();
  Rng rng(7);
  std::map<int, int> size_counts;
  std::map<std::pair<int, int>, int> pair_counts;
  const int draws = 30000;
  for (int i = 0; i < draws; ++i) {
    const TrafficDemand d = generate_demand(topo, rng);
    REQUIRE(d.src != d.dst);
    ++size_counts[d.bandwidth];
    ++pair_counts[{d.src, d.dst}];
  }
  for (int bw : kDemandSizes) {
    const double freq = static_cast<double>(size_counts[bw]) / draws;
    CHECK(freq == doctest::Approx(1.0 / 3.0).epsilon(0.061));  // 1/3 +- 0.02 absolute
    CHECK(std::abs(freq - 1.0 / 3.0) < 0.02);
  }
  CHECK(pair_counts.size() == 14 * 13);
  for (const auto& [pair, count] : pair_counts) {
    const double freq = static_cast<double>(count) / draws;
    CHECK(std::abs(freq - 1.0 / 182.0) < 0.5 / 182.0);  // +-50% relative
  }
}

TEST_CASE("try_allocate subtracts on success and pinpoints the blocking link") {
  const Topology topo("path3", 3, {{0, 1}, {1, 2}});
  const PathTable table = build_path_table(topo, 1);
  Rng rng(3);
  auto [state, demand] = init_env(topo, table, rng, 200.0);
  const CandidatePath& path = table.paths(0, 2).front();  // uses links 0 and 1

  SUBCASE("single allocation: 200 - 64 = 136") {
    const auto next = try_allocate(state, path, 64.0);
    REQUIRE(next.has_value());
    CHECK(next->available(0) == doctest::Approx(136.0));
    CHECK(next->available(1) == doctest::Approx(136.0));
    CHECK(state.available(0) == doctest::Approx(200.0));  // input untouched
  }
  SUBCASE("failure at the first insufficient link leaves state unchanged") {
    EnvState tight = state;
    tight.available_mut()[0] = 64.0;
    tight.available_mut()[1] = 32.0;
    int blocked = -2;
    const auto next = try_allocate(tight, path, 64.0, &blocked);
    CHECK_FALSE(next.has_value());
    CHECK(blocked == 1);
    CHECK(tight.available(0) == doctest::Approx(64.0));
    CHECK(tight.available(1) == doctest::Approx(32.0));
  }
  SUBCASE("twenty-five 8-unit allocations drain a 200-unit link; the 26th fails") {
    EnvState s = state;
    for (int i = 0; i < 25; ++i) {
      auto next = try_allocate(s, path, 8.0);
      REQUIRE(next.has_value());
      s = std::move(*next);
    }
    CHECK(s.available(0) == doctest::Approx(0.0));
    CHECK_FALSE(try_allocate(s, path, 8.0).has_value());
  }
}

TEST_CASE("step rewards the bandwidth on success and zero when done") {
  const Topology topo = triangle_topology();
  const PathTable table = build_path_table(topo, 2);
  Rng rng(11);
  auto [state, first] = init_env(topo, table, rng, 200.0);

  TrafficDemand demand{0, 1, 32};
  const CandidatePath& direct = table.paths(0, 1).front();
  const StepOutcome ok = step(topo, state, demand, direct, rng);
  CHECK(ok.reward == doctest::Approx(32.0));
  CHECK_FALSE(ok.done);
  CHECK(ok.next_state.available(topo.link_between(0, 1)) == doctest::Approx(168.0));
  CHECK(ok.next_demand.valid());

  EnvState drained = state;
  drained.available_mut()[topo.link_between(0, 1)] = 8.0;
  const StepOutcome fail = step(topo, drained, demand, direct, rng);
  CHECK(fail.reward == doctest::Approx(0.0));
  CHECK(fail.done);
  CHECK_FALSE(fail.next_demand.valid());
  CHECK(fail.next_state.available(topo.link_between(0, 1)) == doctest::Approx(8.0));

  TrafficDemand mismatched{0, 2, 8};
  CHECK_THROWS_AS(step(topo, state, mismatched, direct, rng), std::invalid_argument);
}

TEST_CASE("episode log rows export as csv") {
  std::vector<EpisodeLogRow> rows{{0, 3, 7, 32, 1, true}, {1, 2, 5, 64, 0, false}};
  std::ostringstream out;
  write_episode_log_csv(out, rows);
  CHECK(out.str() ==
        "step,src,dst,bw,action_rank,success\n"
        "0,3,7,32,1,1\n"
        "1,2,5,64,0,0\n");
}

TEST_CASE("random episodes conserve capacity and never go negative") {
  const Topology topo = nsfnet_topology();
  const PathTable table = build_path_table(topo, 4);
  Rng seed_rng(98);
  const double max_capacity = 200.0;
  for (int episode = 0; episode < 40; ++episode) {
    Rng rng(seed_rng.next_u64());
    auto [state, demand] = init_env(topo, table, rng, max_capacity);
    std::vector<double> consumed(topo.link_count(), 0.0);
    double score = 0.0;
    bool done = false;
    int steps = 0;
    while (!done) {
      const auto& paths = table.paths(demand.src, demand.dst);
      const CandidatePath& action = paths[rng.uniform_index(paths.size())];
      const StepOutcome outcome = step(topo, state, demand, action, rng);
      if (!outcome.done) {
        for (int l : action.link_sequence) consumed[l] += demand.bandwidth;
        score += outcome.reward;
        state = outcome.next_state;
        demand = outcome.next_demand;
      }
      done = outcome.done;
      ++steps;
      REQUIRE(steps <= 21 * 200 / 8 + 1);  // episodes must terminate
    }
    for (int l = 0; l < topo.link_count(); ++l) {
      CHECK(state.available(l) >= 0.0);
      CHECK(max_capacity - state.available(l) == doctest::Approx(consumed[l]));
    }
    // each accepted demand puts bandwidth * hops onto the links, so the
    // per-link total dominates the episode score (hops >= 1)
    double allocated = 0.0;
    for (int l = 0; l < topo.link_count(); ++l) allocated += consumed[l];
    CHECK(allocated >= score);
    CHECK(score >= 0.0);
  }
}
