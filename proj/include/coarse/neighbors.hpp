#pragma once
// Enumeration of step-<=R pairs. Clouds use spatial bucketing with cell
// width R; graphs grow a shortest-path ball of radius R from each vertex.

#include <array>
#include <functional>
#include <unordered_map>

#include "coarse/core.hpp"

namespace coarse {

class NeighborFinder {
 public:
  /// Bucketing is used up to this dimension; beyond it pairs are scanned.
  static constexpr std::size_t kMaxBucketDim = 4;

  NeighborFinder(const FiniteCoarseInstance& inst, double scale) : inst_(inst), scale_(scale) {
    if (!(scale > 0.0)) throw InputError("scale R must be positive");
    if (inst.is_graph()) {
      dist_.assign(inst.size(), kInfinity);
    } else if (inst.dim() <= kMaxBucketDim) {
      build_buckets();
    }
  }

  double scale() const { return scale_; }

  /// Calls fn(q, d) for every q != p with d(p, q) <= R.
  template <class Fn>
  void for_each(PointId p, Fn&& fn) {
    if (inst_.is_graph()) return grow_ball(p, fn);
    if (inst_.dim() > kMaxBucketDim) {
      for (PointId q = 0; q < inst_.size(); ++q) visit_cloud(p, q, fn);
      return;
    }
    const Key home = key_of(p);
    Key probe = home;
    scan_cells(p, home, probe, 0, fn);
  }

  std::vector<PointId> sorted_neighbors(PointId p) {
    std::vector<PointId> out;
    for_each(p, [&](PointId q, double) { out.push_back(q); });
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  using Key = std::array<std::int64_t, kMaxBucketDim>;

  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::uint64_t h = 1469598103934665603ull;
      for (auto v : k) {
        h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      }
      return static_cast<std::size_t>(h);
    }
  };

  Key key_of(PointId p) const {
    Key k{};
    const auto c = inst_.coords(p);
    for (std::size_t i = 0; i < c.size(); ++i)
      k[i] = static_cast<std::int64_t>(std::floor(c[i] / width_));
    return k;
  }

  void build_buckets() {
    // Widen cells slightly so that tie pairs never straddle two cells apart.
    width_ = scale_ * (1.0 + 4 * kRelTol);
    std::unordered_map<Key, std::vector<PointId>, KeyHash> tmp;
    for (PointId p = 0; p < inst_.size(); ++p) tmp[key_of(p)].push_back(p);
    order_.reserve(inst_.size());
    for (auto& [k, ids] : tmp) {
      const std::size_t begin = order_.size();
      order_.insert(order_.end(), ids.begin(), ids.end());
      cells_.emplace(k, std::pair{begin, order_.size()});
    }
  }

  template <class Fn>
  void scan_cells(PointId p, const Key& home, Key& probe, std::size_t axis, Fn& fn) {
    if (axis == inst_.dim()) {
      auto it = cells_.find(probe);
      if (it == cells_.end()) return;
      for (std::size_t i = it->second.first; i < it->second.second; ++i) visit_cloud(p, order_[i], fn);
      return;
    }
    for (std::int64_t off = -1; off <= 1; ++off) {
      probe[axis] = home[axis] + off;
      scan_cells(p, home, probe, axis + 1, fn);
    }
    probe[axis] = home[axis];
  }

  template <class Fn>
  void visit_cloud(PointId p, PointId q, Fn& fn) {
    if (q == p) return;
    const double d = FiniteCoarseInstance::coordinate_distance(inst_.metric(), inst_.coords(p), inst_.coords(q));
    if (within(d, scale_)) fn(q, d);
  }

  template <class Fn>
  void grow_ball(PointId p, Fn& fn) {
    using Item = std::pair<double, PointId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    touched_.clear();
    dist_[p] = 0.0;
    touched_.push_back(p);
    heap.push({0.0, p});
    const auto& g = inst_.adjacency();
    while (!heap.empty()) {
      auto [d, v] = heap.top();
      heap.pop();
      if (d > dist_[v]) continue;
      if (v != p) fn(v, d);
      for (const auto& a : g.out(v)) {
        const double nd = d + a.weight;
        if (within(nd, scale_) && nd < dist_[a.to]) {
          if (dist_[a.to] == kInfinity) touched_.push_back(a.to);
          dist_[a.to] = nd;
          heap.push({nd, a.to});
        }
      }
    }
    for (PointId v : touched_) dist_[v] = kInfinity;
  }

  const FiniteCoarseInstance& inst_;
  double scale_;
  double width_ = 1.0;
  std::vector<PointId> order_;
  std::unordered_map<Key, std::pair<std::size_t, std::size_t>, KeyHash> cells_;
  std::vector<double> dist_;
  std::vector<PointId> touched_;
};

}  // namespace coarse
