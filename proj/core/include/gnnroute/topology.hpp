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
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gnnroute/rng.hpp"

namespace gnnroute {

/// Raised for unreadable/unparseable topology files and for operations that
/// cannot produce a valid topology (e.g. a connected link removal within the
/// retry budget).
struct TopologyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Undirected multigraph-free network topology. Nodes are dense ids 0..N-1,
/// links dense ids 0..L-1 with endpoints stored as (a, b), a < b. Parallel
/// edges are collapsed and self-loops dropped on construction. Immutable
/// after construction; safe to share read-only across threads.
class Topology {
 public:
  /// Builds a topology from raw edges. Labels, when given, map node id ->
  /// original file label (defaults to the decimal id).
  Topology(std::string name, int node_count, std::vector<std::pair<int, int>> edges,
           std::vector<std::string> node_labels = {});

  const std::string& name() const { return name_; }
  int node_count() const { return node_count_; }
  int link_count() const { return static_cast<int>(links_.size()); }

  /// Endpoints of a link, (a, b) with a < b.
  std::pair<int, int> link(int link_id) const { return links_[link_id]; }
  const std::vector<std::pair<int, int>>& links() const { return links_; }

  /// Links sharing an endpoint node with `link_id`, sorted ascending.
  const std::vector<int>& link_neighbors(int link_id) const { return link_adjacency_[link_id]; }
  const std::vector<std::vector<int>>& link_adjacency() const { return link_adjacency_; }

  /// Incident link ids of a node, sorted ascending.
  const std::vector<int>& node_links(int node) const { return node_links_[node]; }
  int degree(int node) const { return static_cast<int>(node_links_[node].size()); }

  /// Link id joining a and b, or -1 when absent.
  int link_between(int a, int b) const { return link_index_[a * node_count_ + b]; }

  const std::string& node_label(int node) const { return node_labels_[node]; }

  /// False when some node pair has no path; loaders accept such graphs but
  /// flag them since demands between disconnected pairs cannot be routed.
  bool connected() const { return connected_; }

 private:
  std::string name_;
  int node_count_ = 0;
  std::vector<std::pair<int, int>> links_;
  std::vector<std::vector<int>> link_adjacency_;
  std::vector<std::vector<int>> node_links_;
  std::vector<int> link_index_;  // N*N matrix of link ids, -1 when absent
  std::vector<std::string> node_labels_;
  bool connected_ = true;
};

struct DegreeStats {
  double mean_degree = 0.0;      // exactly 2L/N
  double degree_variance = 0.0;  // population variance
};

enum class TopologyFormat { graphml, edgelist, auto_detect };

/// Loads a topology from GraphML (node/edge elements, attributes ignored
/// except endpoints) or a plain edge list (one "a b" pair per line, '#'
/// comments). The topology name derives from the file stem. Throws
/// TopologyError on unreadable files, parse failures, or graphs with fewer
/// than 2 nodes or 1 link.
Topology load_topology(const std::filesystem::path& file,
                       TopologyFormat format = TopologyFormat::auto_detect);

/// GraphML loader entry point on an in-memory document (used by tests).
Topology parse_graphml(const std::string& text, const std::string& name);

/// Edge-list loader entry point on in-memory text (used by tests).
Topology parse_edgelist(const std::string& text, const std::string& name);

DegreeStats degree_stats(const Topology& topo);

bool is_connected(const Topology& topo);

/// One row of the filter report: why a topology was kept or rejected.
struct FilterDecision {
  std::string name;
  int nodes = 0;
  int links = 0;
  DegreeStats stats;
  bool kept = false;
  std::string reason;  // "kept" or first failing predicate
};

struct FilterResult {
  std::vector<Topology> kept;
  std::vector<FilterDecision> report;
};

/// Keeps topologies suitable for the routing scenario: more than 5 and at
/// most 50 nodes, mean degree in [2, 4], and a degree-regularity test that
/// excludes rings: positive degree variance with mean/variance ratio above
/// 0.3. Idempotent on its own output.
FilterResult filter_topologies(const std::vector<Topology>& topos);

/// Removes n randomly chosen links, resampling (up to retry_budget attempts)
/// until the remaining graph is connected. Link ids are re-densified. Throws
/// TopologyError when the budget is exhausted.
Topology remove_random_links(const Topology& topo, int n, Rng& rng, int retry_budget = 1000);

}  // namespace gnnroute
