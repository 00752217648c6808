#pragma once
// Finite metric instances, the scale ladder, and the finite-scale decision
// procedures for control, boundedness, bornology, properness and coarse
// homotopy.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace coarse {

using PointId = std::uint32_t;
inline constexpr PointId kNoPoint = std::numeric_limits<PointId>::max();
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Relative tolerance for every comparison of a distance against a scale.
inline constexpr double kRelTol = 1e-9;

/// d <= R, ties within kRelTol counted as "within R".
inline bool within(double d, double R) { return d <= R + kRelTol * std::abs(R); }

/// Membership in the annulus X \ D(xi; r) (complement of the open ball).
/// r = 0 is the whole space.
inline bool in_annulus(double radius, double r) { return radius >= r - kRelTol * std::abs(r); }

/// Malformed input: bad files, unknown ids, invalid parameters.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MetricKind { euclidean, chebyshev, graph };

inline std::string_view to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::euclidean: return "euclidean";
    case MetricKind::chebyshev: return "chebyshev";
    case MetricKind::graph: return "graph";
  }
  return "?";
}

inline MetricKind parse_metric(std::string_view name) {
  if (name == "euclidean") return MetricKind::euclidean;
  if (name == "chebyshev") return MetricKind::chebyshev;
  if (name == "graph" || name == "graph-shortest-path") return MetricKind::graph;
  throw InputError("unknown metric kind '" + std::string(name) + "'");
}

/// Raw point table: ids[i] has coordinates coords[i*dim .. i*dim+dim).
struct CloudTable {
  std::vector<std::string> ids;
  std::size_t dim = 0;
  std::vector<double> coords;
};

struct WeightedEdge {
  std::string u, v;
  double weight = 1.0;
};

/// Raw graph: declared vertices plus edges. Vertices named only by an edge
/// are appended in order of first appearance.
struct EdgeTable {
  std::vector<std::string> vertices;
  std::vector<WeightedEdge> edges;
};

namespace detail {

struct Arc {
  PointId to;
  double weight;
};

/// Compressed adjacency for graph instances.
struct Adjacency {
  std::vector<std::size_t> offsets;  // size n+1
  std::vector<Arc> arcs;

  std::span<const Arc> out(PointId v) const {
    return {arcs.data() + offsets[v], arcs.data() + offsets[v + 1]};
  }
};

/// Single-source shortest paths. Stops settling once every entry of
/// `targets` is settled (when non-empty) or once distances exceed `limit`.
inline std::vector<double> dijkstra(const Adjacency& g, PointId source, double limit = kInfinity,
                                    std::span<const PointId> targets = {}) {
  const std::size_t n = g.offsets.size() - 1;
  std::vector<double> dist(n, kInfinity);
  std::vector<char> settled(n, 0);
  std::size_t pending = 0;
  std::vector<char> wanted;
  if (!targets.empty()) {
    wanted.assign(n, 0);
    for (PointId t : targets)
      if (!wanted[t]) { wanted[t] = 1; ++pending; }
  }
  using Item = std::pair<double, PointId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.push({0.0, source});
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (settled[v]) continue;
    if (!within(d, limit)) break;
    settled[v] = 1;
    if (!wanted.empty() && wanted[v] && --pending == 0) break;
    for (const Arc& a : g.out(v)) {
      const double nd = d + a.weight;
      if (nd < dist[a.to]) {
        dist[a.to] = nd;
        heap.push({nd, a.to});
      }
    }
  }
  // Entries that were relaxed but never settled are only upper bounds.
  for (std::size_t i = 0; i < n; ++i)
    if (!settled[i]) dist[i] = kInfinity;
  return dist;
}

}  // namespace detail

/// A finite truncation of an unbounded pseudometric space: every point lies
/// within the truncation radius of the base point. Immutable once built; the
/// distance oracle may be queried concurrently.
class FiniteCoarseInstance {
 public:
  /// Instances with fewer points than this memoize full shortest-path rows.
  static constexpr std::size_t kRowCacheLimit = 10000;

  static FiniteCoarseInstance from_cloud(const CloudTable& raw, MetricKind metric,
                                         std::string_view basepoint, double truncation_radius) {
    if (metric == MetricKind::graph) throw InputError("point clouds need a coordinate metric");
    if (raw.ids.empty()) throw InputError("empty point table");
    if (raw.dim == 0) throw InputError("point table has no coordinate columns");
    if (raw.coords.size() != raw.ids.size() * raw.dim)
      throw InputError("coordinate table does not match id count");
    if (!(truncation_radius >= 0.0)) throw InputError("truncation radius must be nonnegative");
    for (double c : raw.coords)
      if (!std::isfinite(c)) throw InputError("non-finite coordinate");

    const auto base = std::find(raw.ids.begin(), raw.ids.end(), basepoint);
    if (base == raw.ids.end()) throw InputError("basepoint '" + std::string(basepoint) + "' not found");
    const std::size_t base_raw = static_cast<std::size_t>(base - raw.ids.begin());

    FiniteCoarseInstance out;
    out.metric_ = metric;
    out.dim_ = raw.dim;
    out.rho_ = truncation_radius;
    const double* xi = raw.coords.data() + base_raw * raw.dim;
    for (std::size_t i = 0; i < raw.ids.size(); ++i) {
      const double* p = raw.coords.data() + i * raw.dim;
      const double r = coordinate_distance(metric, {p, raw.dim}, {xi, raw.dim});
      if (!within(r, truncation_radius)) {
        ++out.dropped_;
        continue;
      }
      if (i == base_raw) out.base_ = static_cast<PointId>(out.labels_.size());
      out.labels_.push_back(raw.ids[i]);
      out.coords_.insert(out.coords_.end(), p, p + raw.dim);
      out.radius_.push_back(r);
    }
    out.index_labels();
    return out;
  }

  /// Graph instance with the shortest-path metric. Vertices unreachable from
  /// the base point are kept (they sit at distance +inf, i.e. at infinity);
  /// reachable vertices beyond the truncation radius are dropped and the
  /// retained induced subgraph defines the metric.
  static FiniteCoarseInstance from_graph(const EdgeTable& raw, std::string_view basepoint,
                                         double truncation_radius) {
    if (raw.vertices.empty() && raw.edges.empty()) throw InputError("empty graph");
    if (!(truncation_radius >= 0.0)) throw InputError("truncation radius must be nonnegative");

    std::vector<std::string> names;
    std::unordered_map<std::string, PointId> index;
    auto intern = [&](const std::string& name, bool declared) {
      auto [it, fresh] = index.emplace(name, static_cast<PointId>(names.size()));
      if (fresh) names.push_back(name);
      else if (declared) throw InputError("duplicate vertex '" + name + "'");
      return it->second;
    };
    for (const auto& v : raw.vertices) intern(v, true);
    std::vector<std::pair<std::pair<PointId, PointId>, double>> edges;
    for (const auto& e : raw.edges) {
      if (!(e.weight >= 0.0) || !std::isfinite(e.weight))
        throw InputError("edge " + e.u + " " + e.v + " has invalid weight");
      edges.push_back({{intern(e.u, false), intern(e.v, false)}, e.weight});
    }
    const auto base = index.find(std::string(basepoint));
    if (base == index.end()) throw InputError("basepoint '" + std::string(basepoint) + "' not found");

    const auto full = make_adjacency(names.size(), edges);
    const auto dist = detail::dijkstra(full, base->second);

    std::vector<PointId> remap(names.size(), kNoPoint);
    FiniteCoarseInstance out;
    out.metric_ = MetricKind::graph;
    out.rho_ = truncation_radius;
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (std::isfinite(dist[i]) && !within(dist[i], truncation_radius)) {
        ++out.dropped_;
        continue;
      }
      remap[i] = static_cast<PointId>(out.labels_.size());
      out.labels_.push_back(names[i]);
      out.radius_.push_back(dist[i]);
    }
    out.base_ = remap[base->second];
    std::vector<std::pair<std::pair<PointId, PointId>, double>> kept;
    for (const auto& [uv, w] : edges)
      if (remap[uv.first] != kNoPoint && remap[uv.second] != kNoPoint)
        kept.push_back({{remap[uv.first], remap[uv.second]}, w});
    out.graph_ = make_adjacency(out.labels_.size(), kept);
    out.index_labels();
    return out;
  }

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return dim_; }
  MetricKind metric() const { return metric_; }
  bool is_graph() const { return metric_ == MetricKind::graph; }
  PointId basepoint() const { return base_; }
  double truncation_radius() const { return rho_; }
  std::size_t dropped() const { return dropped_; }

  const std::string& label(PointId p) const { return labels_.at(p); }
  PointId find(std::string_view label) const {
    auto it = by_label_.find(std::string(label));
    if (it == by_label_.end()) throw InputError("unknown point id '" + std::string(label) + "'");
    return it->second;
  }

  std::span<const double> coords(PointId p) const {
    check(p);
    return {coords_.data() + std::size_t(p) * dim_, dim_};
  }
  /// Distance from the base point.
  double radius(PointId p) const { return radius_.at(p); }
  std::span<const double> radii() const { return radius_; }
  const detail::Adjacency& adjacency() const { return graph_; }

  double distance(PointId p, PointId q) const {
    check(p);
    check(q);
    if (p == q) return 0.0;
    if (!is_graph()) return coordinate_distance(metric_, coords(p), coords(q));
    if (p == base_) return radius_[q];
    if (q == base_) return radius_[p];
    if (size() < kRowCacheLimit) return (*row(std::min(p, q)))[std::max(p, q)];
    const PointId target[] = {q};
    return detail::dijkstra(graph_, p, kInfinity, target)[q];
  }

  /// Distances from p to every point.
  std::vector<double> distances_from(PointId p) const {
    check(p);
    if (is_graph()) {
      if (size() < kRowCacheLimit) return *row(p);
      return detail::dijkstra(graph_, p);
    }
    std::vector<double> out(size());
    for (PointId q = 0; q < size(); ++q) out[q] = coordinate_distance(metric_, coords(p), coords(q));
    return out;
  }

  static double coordinate_distance(MetricKind metric, std::span<const double> a,
                                    std::span<const double> b) {
    double acc = 0.0;
    if (metric == MetricKind::chebyshev) {
      for (std::size_t i = 0; i < a.size(); ++i) acc = std::max(acc, std::abs(a[i] - b[i]));
      return acc;
    }
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc);
  }

 private:
  struct RowCache {
    std::mutex mu;
    std::unordered_map<PointId, std::shared_ptr<const std::vector<double>>> rows;
  };

  FiniteCoarseInstance() : cache_(std::make_shared<RowCache>()) {}

  static detail::Adjacency make_adjacency(
      std::size_t n, const std::vector<std::pair<std::pair<PointId, PointId>, double>>& edges) {
    detail::Adjacency g;
    g.offsets.assign(n + 1, 0);
    for (const auto& [uv, w] : edges) {
      ++g.offsets[uv.first + 1];
      ++g.offsets[uv.second + 1];
    }
    for (std::size_t i = 0; i < n; ++i) g.offsets[i + 1] += g.offsets[i];
    g.arcs.resize(g.offsets[n]);
    std::vector<std::size_t> fill(g.offsets.begin(), g.offsets.end() - 1);
    for (const auto& [uv, w] : edges) {
      g.arcs[fill[uv.first]++] = {uv.second, w};
      g.arcs[fill[uv.second]++] = {uv.first, w};
    }
    return g;
  }

  void index_labels() {
    by_label_.clear();
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (!by_label_.emplace(labels_[i], static_cast<PointId>(i)).second)
        throw InputError("duplicate point id '" + labels_[i] + "'");
    }
  }

  void check(PointId p) const {
    if (p >= labels_.size()) throw InputError("point index " + std::to_string(p) + " out of range");
  }

  std::shared_ptr<const std::vector<double>> row(PointId p) const {
    {
      std::lock_guard lock(cache_->mu);
      if (auto it = cache_->rows.find(p); it != cache_->rows.end()) return it->second;
    }
    auto computed = std::make_shared<const std::vector<double>>(detail::dijkstra(graph_, p));
    std::lock_guard lock(cache_->mu);
    return cache_->rows.emplace(p, std::move(computed)).first->second;
  }

  MetricKind metric_ = MetricKind::euclidean;
  std::size_t dim_ = 0;
  PointId base_ = 0;
  double rho_ = 0.0;
  std::size_t dropped_ = 0;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, PointId> by_label_;
  std::vector<double> coords_;
  std::vector<double> radius_;
  detail::Adjacency graph_;
  std::shared_ptr<RowCache> cache_;
};

using InstancePtr = std::shared_ptr<const FiniteCoarseInstance>;

inline InstancePtr share(FiniteCoarseInstance inst) {
  return std::make_shared<const FiniteCoarseInstance>(std::move(inst));
}

/// Ascending cut-off radii r (r_0 = 0) and ascending entourage scales R.
struct ScaleLadder {
  std::vector<double> r_values;
  std::vector<double> R_values;

  static ScaleLadder make(std::vector<double> r, std::vector<double> R, double truncation_radius) {
    if (r.empty() || r.front() != 0.0) throw InputError("ladder r values must start at 0");
    if (R.empty()) throw InputError("ladder needs at least one scale R");
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!std::isfinite(r[i])) throw InputError("ladder r values must be finite");
      if (i > 0 && !(r[i] > r[i - 1])) throw InputError("ladder r values must be strictly ascending");
    }
    if (!(r.back() < truncation_radius))
      throw InputError("largest ladder r must be below the truncation radius");
    for (std::size_t i = 0; i < R.size(); ++i) {
      if (!std::isfinite(R[i]) || !(R[i] > 0.0)) throw InputError("ladder R values must be positive and finite");
      if (i > 0 && !(R[i] > R[i - 1])) throw InputError("ladder R values must be strictly ascending");
    }
    return ScaleLadder{std::move(r), std::move(R)};
  }

  /// r in {0, rho/16, rho/8, rho/4, 0.45 rho}, R in {1, 2, 4, 8}.
  static ScaleLadder default_for(double truncation_radius) {
    const double rho = truncation_radius;
    return make({0.0, rho / 16, rho / 8, rho / 4, rho / 2 * 0.9}, {1, 2, 4, 8}, rho);
  }
};

/// A total map between two instances, given point by point.
class CoarseMapSample {
 public:
  CoarseMapSample(InstancePtr source, InstancePtr target, std::vector<PointId> assignment)
      : source_(std::move(source)), target_(std::move(target)), assignment_(std::move(assignment)) {
    if (!source_ || !target_) throw InputError("map sample needs source and target");
    if (assignment_.size() != source_->size()) throw InputError("map sample is not total");
    for (PointId y : assignment_)
      if (y >= target_->size()) throw InputError("map sample sends a point outside the target");
    if (!std::isfinite(target_->radius(assignment_[source_->basepoint()])))
      throw InputError("map sample must send the base point finitely close to the target base point");
  }

  const FiniteCoarseInstance& source() const { return *source_; }
  const FiniteCoarseInstance& target() const { return *target_; }
  const InstancePtr& source_ptr() const { return source_; }
  const InstancePtr& target_ptr() const { return target_; }
  PointId operator()(PointId x) const { return assignment_.at(x); }
  std::span<const PointId> assignment() const { return assignment_; }

 private:
  InstancePtr source_, target_;
  std::vector<PointId> assignment_;
};

/// g after f.
inline CoarseMapSample compose(const CoarseMapSample& g, const CoarseMapSample& f) {
  if (f.target_ptr() != g.source_ptr()) throw InputError("map samples are not composable");
  std::vector<PointId> a(f.source().size());
  for (PointId x = 0; x < a.size(); ++x) a[x] = g(f(x));
  return CoarseMapSample(f.source_ptr(), g.target_ptr(), std::move(a));
}

inline CoarseMapSample identity_map(const InstancePtr& inst) {
  std::vector<PointId> a(inst->size());
  for (PointId x = 0; x < a.size(); ++x) a[x] = x;
  return CoarseMapSample(inst, inst, std::move(a));
}

}  // namespace coarse
