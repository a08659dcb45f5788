#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <span>
#include <utility>
#include <vector>

namespace stein {

template <std::size_t D>
using Point = std::array<double, D>;

template <std::size_t D>
double squared_distance(const Point<D>& a, const Point<D>& b) {
  double s = 0.0;
  for (std::size_t c = 0; c < D; ++c) {
    const double t = a[c] - b[c];
    s += t * t;
  }
  return s;
}

/// (squared distance, index), ordered by distance then index.
using Neighbor = std::pair<double, std::uint32_t>;

/// The `count` points closest to q, ascending. Reference implementation.
template <std::size_t D>
std::vector<Neighbor> nearest_bruteforce(std::span<const Point<D>> points, const Point<D>& q,
                                         std::size_t count) {
  std::vector<Neighbor> all(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    all[i] = {squared_distance(points[i], q), static_cast<std::uint32_t>(i)};
  count = std::min(count, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(count), all.end());
  all.resize(count);
  return all;
}

/// Exact k-nearest-neighbor index. Falls back to a linear scan for small inputs.
template <std::size_t D>
class KdTree {
 public:
  static constexpr std::size_t kBruteForceBelow = 256;

  explicit KdTree(std::span<const Point<D>> points, bool force_tree = false)
      : points_(points), use_tree_(force_tree || points.size() >= kBruteForceBelow) {
    if (!use_tree_) return;
    order_.resize(points.size());
    std::iota(order_.begin(), order_.end(), std::uint32_t{0});
    nodes_.reserve(2 * points.size() / kLeaf + 2);
    build(0, order_.size());
  }

  std::size_t size() const noexcept { return points_.size(); }

  std::vector<Neighbor> nearest(const Point<D>& q, std::size_t count) const {
    if (!use_tree_) return nearest_bruteforce<D>(points_, q, count);
    count = std::min(count, points_.size());
    std::priority_queue<Neighbor> heap;  // max-heap of the best `count`
    if (count > 0) search(0, q, count, heap);
    std::vector<Neighbor> out(heap.size());
    for (std::size_t i = out.size(); i-- > 0;) {
      out[i] = heap.top();
      heap.pop();
    }
    return out;
  }

 private:
  static constexpr std::size_t kLeaf = 8;

  struct Node {
    std::size_t begin, end;
    std::size_t axis = 0;
    double split = 0.0;
    std::int64_t left = -1, right = -1;
    Point<D> lo, hi;
  };

  std::size_t build(std::size_t begin, std::size_t end) {
    const std::size_t id = nodes_.size();
    nodes_.push_back(Node{begin, end, 0, 0.0, -1, -1, {}, {}});
    Point<D> lo, hi;
    lo.fill(std::numeric_limits<double>::infinity());
    hi.fill(-std::numeric_limits<double>::infinity());
    for (std::size_t i = begin; i < end; ++i)
      for (std::size_t c = 0; c < D; ++c) {
        lo[c] = std::min(lo[c], points_[order_[i]][c]);
        hi[c] = std::max(hi[c], points_[order_[i]][c]);
      }
    nodes_[id].lo = lo;
    nodes_[id].hi = hi;
    if (end - begin <= kLeaf) return id;
    std::size_t axis = 0;
    for (std::size_t c = 1; c < D; ++c)
      if (hi[c] - lo[c] > hi[axis] - lo[axis]) axis = c;
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::uint32_t a, std::uint32_t b) { return points_[a][axis] < points_[b][axis]; });
    nodes_[id].axis = axis;
    nodes_[id].split = points_[order_[mid]][axis];
    const auto l = build(begin, mid);
    const auto r = build(mid, end);
    nodes_[id].left = static_cast<std::int64_t>(l);
    nodes_[id].right = static_cast<std::int64_t>(r);
    return id;
  }

  static double box_distance(const Node& node, const Point<D>& q) {
    double s = 0.0;
    for (std::size_t c = 0; c < D; ++c) {
      const double t = q[c] < node.lo[c] ? node.lo[c] - q[c] : (q[c] > node.hi[c] ? q[c] - node.hi[c] : 0.0);
      s += t * t;
    }
    return s;
  }

  void search(std::size_t id, const Point<D>& q, std::size_t count,
              std::priority_queue<Neighbor>& heap) const {
    const Node& node = nodes_[id];
    // Non-strict so that ties with the current worst are still visited.
    if (heap.size() == count && box_distance(node, q) > heap.top().first) return;
    if (node.left < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const Neighbor cand{squared_distance(points_[order_[i]], q), order_[i]};
        if (heap.size() < count) {
          heap.push(cand);
        } else if (cand < heap.top()) {
          heap.pop();
          heap.push(cand);
        }
      }
      return;
    }
    const bool go_left = q[node.axis] < node.split;
    search(static_cast<std::size_t>(go_left ? node.left : node.right), q, count, heap);
    search(static_cast<std::size_t>(go_left ? node.right : node.left), q, count, heap);
  }

  std::span<const Point<D>> points_;
  bool use_tree_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace stein
