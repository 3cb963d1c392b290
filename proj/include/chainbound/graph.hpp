#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace chainbound {

/// Undirected hardware connectivity graph; edges stored once with p < q.
struct HardwareGraph {
  int num_nodes = 0;
  std::vector<std::pair<int, int>> edges;

  HardwareGraph() = default;
  explicit HardwareGraph(int n) : num_nodes(n) {}

  void add_edge(int p, int q) {
    if (p > q) std::swap(p, q);
    edges.emplace_back(p, q);
  }

  void validate() const {
    if (num_nodes < 0) throw validation_error("negative node count");
    std::vector<std::pair<int, int>> seen;
    seen.reserve(edges.size());
    for (const auto& [p, q] : edges) {
      if (p < 0 || q < 0 || p >= num_nodes || q >= num_nodes)
        throw validation_error("edge endpoint out of range: (" + std::to_string(p) + "," +
                               std::to_string(q) + ")");
      if (p == q) throw validation_error("self loop on node " + std::to_string(p));
      if (p > q) throw validation_error("edge endpoints not ordered");
      seen.emplace_back(p, q);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
      throw validation_error("duplicate edge");
  }

  bool has_edge(int p, int q) const {
    if (p > q) std::swap(p, q);
    return std::find(edges.begin(), edges.end(), std::make_pair(p, q)) != edges.end();
  }

  std::vector<std::vector<int>> adjacency() const {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(num_nodes));
    for (const auto& [p, q] : edges) {
      adj[static_cast<std::size_t>(p)].push_back(q);
      adj[static_cast<std::size_t>(q)].push_back(p);
    }
    return adj;
  }
};

}  // namespace chainbound
