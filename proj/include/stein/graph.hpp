#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stein/error.hpp"

namespace stein {

/// Undirected simple graph on {0, ..., n-1}, stored as a sorted edge list.
class IndexGraph {
 public:
  using Edge = std::pair<std::uint32_t, std::uint32_t>;

  IndexGraph() = default;
  explicit IndexGraph(std::size_t n) : n_(n) {}

  /// Normalizes to i < j, sorts, removes duplicates. Self-loops and
  /// out-of-range endpoints throw.
  IndexGraph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
    for (auto& [a, b] : edges_) {
      if (a == b) throw InvalidArgumentError("graph edges may not be self-loops");
      if (a >= n_ || b >= n_) throw InvalidArgumentError("graph edge endpoint out of range");
      if (a > b) std::swap(a, b);
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  }

  /// Graph that joins every pair inside each group.
  static IndexGraph from_cliques(std::size_t n, const std::vector<std::vector<std::uint32_t>>& groups) {
    std::vector<Edge> edges;
    for (const auto& g : groups)
      for (std::size_t a = 0; a < g.size(); ++a)
        for (std::size_t b = a + 1; b < g.size(); ++b)
          if (g[a] != g[b]) edges.emplace_back(g[a], g[b]);
    return IndexGraph(n, std::move(edges));
  }

  static IndexGraph complete(std::size_t n) {
    std::vector<Edge> edges;
    for (std::uint32_t i = 0; i < n; ++i)
      for (std::uint32_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
    return IndexGraph(n, std::move(edges));
  }

  std::size_t n() const noexcept { return n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  bool has_edge(std::size_t i, std::size_t j) const {
    if (i == j) return false;
    Edge e{static_cast<std::uint32_t>(std::min(i, j)), static_cast<std::uint32_t>(std::max(i, j))};
    return std::binary_search(edges_.begin(), edges_.end(), e);
  }

  std::size_t degree(std::size_t v) const {
    std::size_t d = 0;
    for (const auto& [a, b] : edges_) d += (a == v) + (b == v);
    return d;
  }

  std::vector<std::size_t> degrees() const {
    std::vector<std::size_t> d(n_, 0);
    for (const auto& [a, b] : edges_) {
      ++d[a];
      ++d[b];
    }
    return d;
  }

  std::size_t max_degree() const {
    const auto d = degrees();
    return d.empty() ? 0 : *std::max_element(d.begin(), d.end());
  }

  /// Subgraph induced on `vertices`, relabelled 0..k-1 in the given order.
  IndexGraph induced(std::span<const std::size_t> vertices) const {
    std::vector<Edge> edges;
    for (std::size_t a = 0; a < vertices.size(); ++a)
      for (std::size_t b = a + 1; b < vertices.size(); ++b)
        if (has_edge(vertices[a], vertices[b]))
          edges.emplace_back(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));
    return IndexGraph(vertices.size(), std::move(edges));
  }

  /// True when every edge of *this is an edge of other (same vertex count).
  bool subgraph_of(const IndexGraph& other) const {
    return n_ == other.n_ &&
           std::includes(other.edges_.begin(), other.edges_.end(), edges_.begin(), edges_.end());
  }

  friend bool operator==(const IndexGraph&, const IndexGraph&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
};

/// A deterministic map from coordinate vectors (of any length) to graphs on
/// their index sets.
template <class Value>
struct GraphicalRule {
  std::string name;
  std::function<IndexGraph(std::span<const Value>)> build;
  bool claimed_symmetric = true;
  // Name of the rule this one extends, when it is an extension.
  std::optional<std::string> extension_of;

  IndexGraph operator()(std::span<const Value> x) const { return build(x); }
};

template <class Value>
GraphicalRule<Value> edgeless_rule() {
  return {"edgeless", [](std::span<const Value> x) { return IndexGraph(x.size()); }, true, {}};
}

template <class Value>
GraphicalRule<Value> complete_rule() {
  return {"complete", [](std::span<const Value> x) { return IndexGraph::complete(x.size()); }, true, {}};
}

}  // namespace stein
