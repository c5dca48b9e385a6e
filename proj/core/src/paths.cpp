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

#include "gnnroute/paths.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>

#include "gnnroute/csvio.hpp"

namespace gnnroute {

namespace {

constexpr int kUnreachable = std::numeric_limits<int>::max();

// BFS hop distances from every node to target.
std::vector<int> hop_distances_to(const Topology& topo, int target) {
  std::vector<int> dist(topo.node_count(), kUnreachable);
  std::queue<int> frontier;
  dist[target] = 0;
  frontier.push(target);
  while (!frontier.empty()) {
    const int v = frontier.front();
    frontier.pop();
    for (int l : topo.node_links(v)) {
      auto [a, b] = topo.link(l);
      const int u = (a == v) ? b : a;
      if (dist[u] == kUnreachable) {
        dist[u] = dist[v] + 1;
        frontier.push(u);
      }
    }
  }
  return dist;
}

struct SearchEntry {
  int f = 0;  // hops so far + BFS lower bound to dst
  std::vector<int> nodes;
};

// Min-heap order on (f, lexicographic node sequence).
struct EntryAfter {
  bool operator()(const SearchEntry& lhs, const SearchEntry& rhs) const {
    if (lhs.f != rhs.f) return lhs.f > rhs.f;
    return lhs.nodes > rhs.nodes;
  }
};

}  // namespace

// Best-first enumeration of partial simple paths keyed by
// (hops + BFS bound, node sequence). The bound is consistent, so complete
// paths pop in exactly (hop count, lexicographic) order and the first k pops
// at dst are the answer.
std::vector<CandidatePath> k_shortest_paths(const Topology& topo, int src, int dst, int k) {
  if (src == dst) throw std::invalid_argument("k_shortest_paths: src == dst");
  if (k < 1) throw std::invalid_argument("k_shortest_paths: k must be >= 1");
  if (src < 0 || dst < 0 || src >= topo.node_count() || dst >= topo.node_count())
    throw std::invalid_argument("k_shortest_paths: node id out of range");

  const std::vector<int> bound = hop_distances_to(topo, dst);
  std::vector<CandidatePath> result;
  if (bound[src] == kUnreachable) return result;

  // Neighbors sorted by node id, resolved once.
  std::vector<std::vector<std::pair<int, int>>> neighbors(topo.node_count());  // (node, link)
  for (int v = 0; v < topo.node_count(); ++v) {
    for (int l : topo.node_links(v)) {
      auto [a, b] = topo.link(l);
      neighbors[v].emplace_back(a == v ? b : a, l);
    }
    std::sort(neighbors[v].begin(), neighbors[v].end());
  }

  std::priority_queue<SearchEntry, std::vector<SearchEntry>, EntryAfter> frontier;
  frontier.push({bound[src], {src}});
  while (!frontier.empty() && static_cast<int>(result.size()) < k) {
    SearchEntry entry = frontier.top();
    frontier.pop();
    const int tail = entry.nodes.back();
    if (tail == dst) {
      CandidatePath path;
      path.node_sequence = std::move(entry.nodes);
      path.link_sequence.reserve(path.node_sequence.size() - 1);
      for (std::size_t i = 0; i + 1 < path.node_sequence.size(); ++i)
        path.link_sequence.push_back(
            topo.link_between(path.node_sequence[i], path.node_sequence[i + 1]));
      result.push_back(std::move(path));
      continue;
    }
    const int hops = static_cast<int>(entry.nodes.size()) - 1;
    for (auto [next, link] : neighbors[tail]) {
      (void)link;
      if (bound[next] == kUnreachable) continue;
      if (std::find(entry.nodes.begin(), entry.nodes.end(), next) != entry.nodes.end())
        continue;  // keep the path simple
      SearchEntry child;
      child.nodes = entry.nodes;
      child.nodes.push_back(next);
      child.f = hops + 1 + bound[next];
      frontier.push(std::move(child));
    }
  }
  return result;
}

PathTable build_path_table(const Topology& topo, int k) {
  if (k < 1) throw std::invalid_argument("build_path_table: k must be >= 1");
  PathTable table;
  table.node_count_ = topo.node_count();
  table.k_ = k;
  table.table_.resize(static_cast<std::size_t>(topo.node_count()) * topo.node_count());
  for (int src = 0; src < topo.node_count(); ++src) {
    for (int dst = 0; dst < topo.node_count(); ++dst) {
      if (src == dst) continue;
      auto& slot = table.table_[src * topo.node_count() + dst];
      slot = k_shortest_paths(topo, src, dst, k);
      table.total_paths_ += static_cast<std::int64_t>(slot.size());
    }
  }
  return table;
}

void PathTable::write_csv(std::ostream& out) const {
  write_csv_row(out, {"src", "dst", "rank", "node_sequence"});
  for (int src = 0; src < node_count_; ++src) {
    for (int dst = 0; dst < node_count_; ++dst) {
      if (src == dst) continue;
      const auto& list = paths(src, dst);
      for (std::size_t rank = 0; rank < list.size(); ++rank) {
        std::string seq;
        for (std::size_t i = 0; i < list[rank].node_sequence.size(); ++i) {
          if (i) seq += '-';
          seq += std::to_string(list[rank].node_sequence[i]);
        }
        write_csv_row(out, {std::to_string(src), std::to_string(dst), std::to_string(rank), seq});
      }
    }
  }
}

std::vector<std::int64_t> link_path_counts(const Topology& topo, const PathTable& table) {
  std::vector<std::int64_t> counts(topo.link_count(), 0);
  for (int src = 0; src < table.node_count(); ++src) {
    for (int dst = 0; dst < table.node_count(); ++dst) {
      if (src == dst) continue;
      for (const auto& path : table.paths(src, dst))
        for (int l : path.link_sequence) ++counts[l];
    }
  }
  return counts;
}

std::vector<double> link_betweenness(const Topology& topo, const PathTable& table) {
  const auto counts = link_path_counts(topo, table);
  const double total = static_cast<double>(table.total_paths());
  std::vector<double> betweenness(counts.size(), 0.0);
  if (total > 0)
    for (std::size_t l = 0; l < counts.size(); ++l)
      betweenness[l] = static_cast<double>(counts[l]) / total;
  return betweenness;
}

}  // namespace gnnroute
