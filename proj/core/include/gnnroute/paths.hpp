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
#include <ostream>
#include <vector>

#include "gnnroute/topology.hpp"

namespace gnnroute {

/// A simple path: node_sequence[i] and node_sequence[i+1] are joined by
/// link_sequence[i]. hop_count == |link_sequence| == |node_sequence| - 1.
struct CandidatePath {
  std::vector<int> node_sequence;
  std::vector<int> link_sequence;

  int hop_count() const { return static_cast<int>(link_sequence.size()); }
  int src() const { return node_sequence.front(); }
  int dst() const { return node_sequence.back(); }
};

/// The k simple paths from src to dst with minimum hop count, ties broken by
/// lexicographic node sequence. Returns fewer than k when fewer simple paths
/// exist, and an empty list when dst is unreachable. Deterministic.
std::vector<CandidatePath> k_shortest_paths(const Topology& topo, int src, int dst, int k);

/// Candidate paths for every ordered (src, dst) pair, src != dst. (src, dst)
/// and (dst, src) are computed independently. Immutable after construction.
class PathTable {
 public:
  const std::vector<CandidatePath>& paths(int src, int dst) const {
    return table_[src * node_count_ + dst];
  }
  int k() const { return k_; }
  int node_count() const { return node_count_; }

  /// Total number of paths across all ordered pairs.
  std::int64_t total_paths() const { return total_paths_; }

  /// Debug dump: src,dst,rank,node_sequence (nodes joined by '-').
  void write_csv(std::ostream& out) const;

  friend PathTable build_path_table(const Topology& topo, int k);

 private:
  int node_count_ = 0;
  int k_ = 0;
  std::int64_t total_paths_ = 0;
  std::vector<std::vector<CandidatePath>> table_;
};

PathTable build_path_table(const Topology& topo, int k);

/// Per-link count of table paths whose link_sequence contains the link.
std::vector<std::int64_t> link_path_counts(const Topology& topo, const PathTable& table);

/// Path-based link betweenness: per-link path count divided by the total
/// number of paths in the table. Values lie in [0, 1].
std::vector<double> link_betweenness(const Topology& topo, const PathTable& table);

}  // namespace gnnroute
