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

#include <numeric>
#include <set>
#include <sstream>

#include "gnnroute/paths.hpp"
#include "test_support.hpp"

using namespace gnnroute;
using namespace gnnroute::testing;

namespace {

void check_path_valid(const Topology& topo, const CandidatePath& path) {
  REQUIRE(path.node_sequence.size() == path.link_sequence.size() + 1);
  std::set<int> seen;
  for (int v : path.node_sequence) CHECK(seen.insert(v).second);  // simple
  for (std::size_t i = 0; i + 1 < path.node_sequence.size(); ++i) {
    const int link = topo.link_between(path.node_sequence[i], path.node_sequence[i + 1]);
    REQUIRE(link >= 0);
    CHECK(link == path.link_sequence[i]);
  }
}

}  // namespace

TEST_CASE("triangle k=2 gives the direct link then the detour") {
  const Topology topo = triangle_topology();
  const auto paths = k_shortest_paths(topo, 0, 1, 2);
  REQUIRE(paths.size() == 2);
  CHECK(paths[0].node_sequence == std::vector<int>{0, 1});
  CHECK(paths[1].node_sequence == std::vector<int>{0, 2, 1});
  CHECK(paths[0].hop_count() == 1);
  CHECK(paths[1].hop_count() == 2);
}

TEST_CASE("a 3-node path graph has exactly one simple route end to end") {
  const Topology topo("path3", 3, {{0, 1}, {1, 2}});
  const auto paths = k_shortest_paths(topo, 0, 2, 4);
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].node_sequence == std::vector<int>{0, 1, 2});
}

TEST_CASE("unreachable destination yields an empty list") {
  const Topology topo = parse_edgelist("0 1\n2 3", "split");
  CHECK(k_shortest_paths(topo, 0, 2, 4).empty());
}

TEST_CASE("src == dst and bad k are rejected") {
  const Topology topo = triangle_topology();
  CHECK_THROWS_AS(k_shortest_paths(topo, 1, 1, 2), std::invalid_argument);
  CHECK_THROWS_AS(k_shortest_paths(topo, 0, 1, 0), std::invalid_argument);
}

TEST_CASE("k shortest paths match exhaustive enumeration on random graphs") {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 5 + static_cast<int>(rng.uniform_index(4));  // 5..8 nodes
    const Topology topo = random_connected_topology(n, 1 + static_cast<int>(rng.uniform_index(7)),
                                                    rng);
    const int src = static_cast<int>(rng.uniform_index(n));
    int dst = static_cast<int>(rng.uniform_index(n - 1));
    if (dst >= src) ++dst;
    const int k = 1 + static_cast<int>(rng.uniform_index(4));

    const auto got = k_shortest_paths(topo, src, dst, k);
    const auto expected = brute_force_k_paths(topo, src, dst, k);
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].node_sequence == expected[i]);
      check_path_valid(topo, got[i]);
    }
  }
}

TEST_CASE("k shortest paths are deterministic across reruns") {
  const Topology topo = nsfnet_topology();
  const auto a = k_shortest_paths(topo, 0, 13, 4);
  const auto b = k_shortest_paths(topo, 0, 13, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].node_sequence == b[i].node_sequence);
}

TEST_CASE("path table covers all ordered pairs") {
  SUBCASE("triangle, k=4: six pairs with two paths each") {
    const Topology topo = triangle_topology();
    const PathTable table = build_path_table(topo, 4);
    CHECK(table.total_paths() == 12);
    for (int s = 0; s < 3; ++s)
      for (int d = 0; d < 3; ++d)
        if (s != d) CHECK(table.paths(s, d).size() == 2);
  }
  SUBCASE("NSFNet, k=4: every ordered pair has exactly 4 entries") {
    const Topology topo = nsfnet_topology();
    const PathTable table = build_path_table(topo, 4);
    CHECK(table.total_paths() == 14 * 13 * 4);
    for (int s = 0; s < 14; ++s)
      for (int d = 0; d < 14; ++d) {
        if (s == d) continue;
        REQUIRE(table.paths(s, d).size() == 4);
        for (const auto& p : table.paths(s, d)) {
          CHECK(p.src() == s);
          CHECK(p.dst() == d);
        }
      }
    // spot-check a few pairs against the enumeration oracle
    for (auto [s, d] : {std::pair{0, 13}, {7, 3}, {10, 2}}) {
      const auto expected = brute_force_k_paths(topo, s, d, 4);
      const auto& got = table.paths(s, d);
      REQUIRE(got.size() == expected.size());
      for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].node_sequence == expected[i]);
    }
  }
  SUBCASE("pendant node pairs have exactly one path") {
    // triangle with a pendant hanging off node 2
    const Topology topo("pendant", 4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}});
    const PathTable table = build_path_table(topo, 4);
    CHECK(table.paths(3, 2).size() == 1);
    CHECK(table.paths(0, 3).size() == 2);  // 0-2-3 and 0-1-2-3
    for (const auto& p : table.paths(0, 3)) CHECK(p.node_sequence.back() == 3);
  }
}

TEST_CASE("triangle betweenness is 1/3 at k=1 and 1/2 at k=2") {
  const Topology topo = triangle_topology();
  const PathTable t1 = build_path_table(topo, 1);
  for (double b : link_betweenness(topo, t1)) CHECK(b == doctest::Approx(1.0 / 3.0));
  const PathTable t2 = build_path_table(topo, 2);
  for (double b : link_betweenness(topo, t2)) CHECK(b == doctest::Approx(0.5));
}

TEST_CASE("betweenness double-counting identity holds exactly") {
  Rng rng(314);
  for (int trial = 0; trial < 20; ++trial) {
    const Topology topo = random_connected_topology(
        4 + static_cast<int>(rng.uniform_index(6)), static_cast<int>(rng.uniform_index(8)), rng);
    const PathTable table = build_path_table(topo, 1 + static_cast<int>(rng.uniform_index(4)));

    const auto counts = link_path_counts(topo, table);
    std::int64_t count_sum = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
    std::int64_t hop_sum = 0;
    for (int s = 0; s < topo.node_count(); ++s)
      for (int d = 0; d < topo.node_count(); ++d)
        if (s != d)
          for (const auto& p : table.paths(s, d)) hop_sum += p.hop_count();
    CHECK(count_sum == hop_sum);

    for (double b : link_betweenness(topo, table)) {
      CHECK(b >= 0.0);
      CHECK(b <= 1.0);
    }
  }
}

TEST_CASE("path table csv dump has one row per path") {
  const Topology topo = triangle_topology();
  const PathTable table = build_path_table(topo, 2);
  std::ostringstream out;
  table.write_csv(out);
  int lines = 0;
  for (char c : out.str())
    if (c == '\n') ++lines;
  CHECK(lines == 1 + table.total_paths());  // header + rows
}
