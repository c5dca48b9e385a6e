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

#include "gnnroute/topology.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace gnnroute {

Topology::Topology(std::string name, int node_count, std::vector<std::pair<int, int>> edges,
                   std::vector<std::string> node_labels)
    : name_(std::move(name)), node_count_(node_count), node_labels_(std::move(node_labels)) {
  if (node_count_ < 2) throw TopologyError(name_ + ": topology needs at least 2 nodes");

  if (node_labels_.empty()) {
    node_labels_.reserve(node_count_);
    for (int v = 0; v < node_count_; ++v) node_labels_.push_back(std::to_string(v));
  }
  if (static_cast<int>(node_labels_.size()) != node_count_)
    throw TopologyError(name_ + ": node label count does not match node count");

  // Collapse parallel edges, drop self-loops, keep (a, b) with a < b.
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= node_count_ || b >= node_count_)
      throw TopologyError(name_ + ": edge endpoint out of range");
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    seen.insert({a, b});
  }
  links_.assign(seen.begin(), seen.end());
  if (links_.empty()) throw TopologyError(name_ + ": topology needs at least 1 link");

  link_index_.assign(static_cast<std::size_t>(node_count_) * node_count_, -1);
  node_links_.assign(node_count_, {});
  for (int l = 0; l < link_count(); ++l) {
    auto [a, b] = links_[l];
    link_index_[a * node_count_ + b] = l;
    link_index_[b * node_count_ + a] = l;
    node_links_[a].push_back(l);
    node_links_[b].push_back(l);
  }

  link_adjacency_.assign(link_count(), {});
  for (int l = 0; l < link_count(); ++l) {
    auto [a, b] = links_[l];
    std::set<int> adj;
    for (int other : node_links_[a])
      if (other != l) adj.insert(other);
    for (int other : node_links_[b])
      if (other != l) adj.insert(other);
    link_adjacency_[l].assign(adj.begin(), adj.end());
  }

  connected_ = is_connected(*this);
}

bool is_connected(const Topology& topo) {
  const int n = topo.node_count();
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int l : topo.node_links(v)) {
      auto [a, b] = topo.link(l);
      int u = (a == v) ? b : a;
      if (!seen[u]) {
        seen[u] = 1;
        ++count;
        stack.push_back(u);
      }
    }
  }
  return count == n;
}

DegreeStats degree_stats(const Topology& topo) {
  const int n = topo.node_count();
  DegreeStats stats;
  stats.mean_degree = 2.0 * topo.link_count() / n;
  double acc = 0.0;
  for (int v = 0; v < n; ++v) {
    const double d = topo.degree(v) - stats.mean_degree;
    acc += d * d;
  }
  stats.degree_variance = acc / n;
  return stats;
}

FilterResult filter_topologies(const std::vector<Topology>& topos) {
  FilterResult result;
  for (const auto& topo : topos) {
    FilterDecision d;
    d.name = topo.name();
    d.nodes = topo.node_count();
    d.links = topo.link_count();
    d.stats = degree_stats(topo);
    const double mean = d.stats.mean_degree;
    const double var = d.stats.degree_variance;
    if (d.nodes <= 5) {
      d.reason = "too few nodes (<= 5)";
    } else if (d.nodes > 50) {
      d.reason = "too many nodes (> 50)";
    } else if (mean < 2.0 || mean > 4.0) {
      d.reason = "mean degree outside [2, 4]";
    } else if (var <= 0.0) {
      d.reason = "zero degree variance (ring-like)";
    } else if (mean / var <= 0.3) {
      d.reason = "degree ratio mean/variance <= 0.3";
    } else {
      d.kept = true;
      d.reason = "kept";
    }
    if (d.kept) result.kept.push_back(topo);
    result.report.push_back(std::move(d));
  }
  return result;
}

Topology remove_random_links(const Topology& topo, int n, Rng& rng, int retry_budget) {
  const int link_total = topo.link_count();
  if (n < 0 || n >= link_total)
    throw TopologyError(topo.name() + ": removal count must be in [0, L)");
  if (n == 0) return topo;

  std::vector<std::string> labels;
  labels.reserve(topo.node_count());
  for (int v = 0; v < topo.node_count(); ++v) labels.push_back(topo.node_label(v));

  for (int attempt = 0; attempt < retry_budget; ++attempt) {
    // Sample n distinct link ids (partial Fisher-Yates over the id range).
    std::vector<int> ids(link_total);
    for (int i = 0; i < link_total; ++i) ids[i] = i;
    for (int i = 0; i < n; ++i) {
      const std::size_t j = i + rng.uniform_index(link_total - i);
      std::swap(ids[i], ids[j]);
    }
    std::vector<char> removed(link_total, 0);
    for (int i = 0; i < n; ++i) removed[ids[i]] = 1;

    std::vector<std::pair<int, int>> kept;
    kept.reserve(link_total - n);
    for (int l = 0; l < link_total; ++l)
      if (!removed[l]) kept.push_back(topo.link(l));

    Topology candidate(topo.name(), topo.node_count(), kept, labels);
    if (candidate.connected()) return candidate;
  }
  throw TopologyError(topo.name() + ": no connected " + std::to_string(n) +
                      "-link removal found within " + std::to_string(retry_budget) + " retries");
}

// ---------------------------------------------------------------------------
// Loaders
// ---------------------------------------------------------------------------

namespace {

struct LabelPool {
  std::map<std::string, int> ids;
  std::vector<std::string> labels;

  int intern(const std::string& label) {
    auto [it, inserted] = ids.try_emplace(label, static_cast<int>(labels.size()));
    if (inserted) labels.push_back(label);
    return it->second;
  }
};

std::string unescape_xml(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] == '&') {
      auto rest = s.substr(i);
      if (rest.starts_with("&amp;")) {
        out += '&';
        i += 5;
        continue;
      }
      if (rest.starts_with("&lt;")) {
        out += '<';
        i += 4;
        continue;
      }
      if (rest.starts_with("&gt;")) {
        out += '>';
        i += 4;
        continue;
      }
      if (rest.starts_with("&quot;")) {
        out += '"';
        i += 6;
        continue;
      }
      if (rest.starts_with("&apos;")) {
        out += '\'';
        i += 6;
        continue;
      }
    }
    out += s[i++];
  }
  return out;
}

// Attributes of one XML start tag, body = text between the element name and '>'.
std::map<std::string, std::string> parse_attributes(std::string_view body,
                                                    const std::string& context) {
  std::map<std::string, std::string> attrs;
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
  };
  for (;;) {
    skip_ws();
    if (i >= body.size() || body[i] == '/') break;
    std::size_t name_start = i;
    while (i < body.size() && body[i] != '=' && !std::isspace(static_cast<unsigned char>(body[i])))
      ++i;
    std::string name(body.substr(name_start, i - name_start));
    skip_ws();
    if (i >= body.size() || body[i] != '=')
      throw TopologyError(context + ": malformed attribute '" + name + "'");
    ++i;
    skip_ws();
    if (i >= body.size() || (body[i] != '"' && body[i] != '\''))
      throw TopologyError(context + ": attribute '" + name + "' missing quoted value");
    const char quote = body[i++];
    std::size_t value_start = i;
    while (i < body.size() && body[i] != quote) ++i;
    if (i >= body.size()) throw TopologyError(context + ": unterminated attribute value");
    attrs[name] = unescape_xml(body.substr(value_start, i - value_start));
    ++i;
  }
  return attrs;
}

bool tag_name_is(std::string_view tag, std::string_view name) {
  if (!tag.starts_with(name)) return false;
  if (tag.size() == name.size()) return true;
  const char c = tag[name.size()];
  return std::isspace(static_cast<unsigned char>(c)) || c == '/' || c == '>';
}

}  // namespace

Topology parse_graphml(const std::string& text, const std::string& name) {
  LabelPool pool;
  std::vector<std::pair<std::string, std::string>> raw_edges;

  std::size_t i = 0;
  const std::size_t n = text.size();
  bool saw_graphml_element = false;
  while (i < n) {
    if (text[i] != '<') {
      ++i;
      continue;
    }
    if (text.compare(i, 4, "<!--") == 0) {
      const std::size_t end = text.find("-->", i + 4);
      if (end == std::string::npos) throw TopologyError(name + ": unterminated XML comment");
      i = end + 3;
      continue;
    }
    std::size_t close = text.find('>', i);
    if (close == std::string::npos) throw TopologyError(name + ": unterminated XML tag");
    std::string_view tag(text.data() + i + 1, close - i - 1);
    if (tag_name_is(tag, "graphml")) saw_graphml_element = true;
    if (tag_name_is(tag, "node")) {
      auto attrs = parse_attributes(tag.substr(4), name + ": <node>");
      auto it = attrs.find("id");
      if (it == attrs.end()) throw TopologyError(name + ": <node> without id attribute");
      pool.intern(it->second);
    } else if (tag_name_is(tag, "edge")) {
      auto attrs = parse_attributes(tag.substr(4), name + ": <edge>");
      auto src = attrs.find("source");
      auto dst = attrs.find("target");
      if (src == attrs.end() || dst == attrs.end())
        throw TopologyError(name + ": <edge> without source/target");
      raw_edges.emplace_back(src->second, dst->second);
    }
    i = close + 1;
  }
  if (!saw_graphml_element) throw TopologyError(name + ": not a GraphML document");

  std::vector<std::pair<int, int>> edges;
  edges.reserve(raw_edges.size());
  for (const auto& [a, b] : raw_edges) {
    const int ia = pool.intern(a);
    const int ib = pool.intern(b);
    edges.emplace_back(ia, ib);
  }
  const int node_count = static_cast<int>(pool.labels.size());
  return Topology(name, node_count, std::move(edges), std::move(pool.labels));
}

Topology parse_edgelist(const std::string& text, const std::string& name) {
  LabelPool pool;
  std::vector<std::pair<int, int>> edges;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string a, b, extra;
    if (!(fields >> a)) continue;  // blank/comment line
    if (!(fields >> b) || (fields >> extra))
      throw TopologyError(name + ": line " + std::to_string(line_no) +
                          ": expected exactly two node labels");
    const int ia = pool.intern(a);
    const int ib = pool.intern(b);
    edges.emplace_back(ia, ib);
  }
  const int node_count = static_cast<int>(pool.labels.size());
  return Topology(name, node_count, std::move(edges), std::move(pool.labels));
}

Topology load_topology(const std::filesystem::path& file, TopologyFormat format) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw TopologyError("cannot open " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const std::string name = file.stem().string();

  if (format == TopologyFormat::auto_detect) {
    const bool looks_xml = text.find("<graphml") != std::string::npos ||
                           file.extension() == ".graphml" || file.extension() == ".xml";
    format = looks_xml ? TopologyFormat::graphml : TopologyFormat::edgelist;
  }
  return format == TopologyFormat::graphml ? parse_graphml(text, name)
                                           : parse_edgelist(text, name);
}

}  // namespace gnnroute
