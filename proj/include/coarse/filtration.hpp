#pragma once
// The (r, R)-indexed chain-component matrix of annuli X \ D(xi; r) and the
// end system assembled from it.

#include <cstdlib>
#include <map>
#include <optional>
#include <thread>

#include "coarse/core.hpp"
#include "coarse/neighbors.hpp"

namespace coarse {

/// Union-find with path halving and union by size.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    for (std::size_t i = 0; i < n; ++i) parent_[i] = static_cast<PointId>(i);
  }
  PointId find(PointId x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(PointId a, PointId b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

 private:
  std::vector<PointId> parent_;
  std::vector<std::size_t> size_;
};

/// Chain components of one annulus. Each component is labeled by its
/// minimum point id; points outside the annulus carry kNoPoint.
struct Partition {
  std::vector<PointId> labels;
  std::size_t count = 0;

  bool contains(PointId p) const { return labels.at(p) != kNoPoint; }
  PointId label_of(PointId p) const { return labels.at(p); }

  /// Component labels in ascending order.
  std::vector<PointId> components() const {
    std::vector<PointId> out;
    for (PointId p = 0; p < labels.size(); ++p)
      if (labels[p] == p) out.push_back(p);
    return out;
  }
  std::vector<PointId> members(PointId label) const {
    std::vector<PointId> out;
    for (PointId p = 0; p < labels.size(); ++p)
      if (labels[p] == label) out.push_back(p);
    return out;
  }
};

namespace detail {

inline Partition snapshot(DisjointSets& sets, const std::vector<char>& active) {
  const std::size_t n = active.size();
  Partition part;
  part.labels.assign(n, kNoPoint);
  std::vector<PointId> min_of_root(n, kNoPoint);
  for (PointId p = 0; p < n; ++p) {
    if (!active[p]) continue;
    const PointId root = sets.find(p);
    if (min_of_root[root] == kNoPoint) {
      min_of_root[root] = p;  // p ascends, so the first hit is the minimum
      ++part.count;
    }
    part.labels[p] = min_of_root[root];
  }
  return part;
}

}  // namespace detail

/// Partitions of every annulus at one scale R, for ascending cut-offs.
/// Points are added in order of decreasing radius, so each step-<=R pair is
/// enumerated once for all cut-offs.
inline std::vector<Partition> chain_filtration(const FiniteCoarseInstance& inst,
                                               std::span<const double> cutoffs, double R) {
  const std::size_t n = inst.size();
  std::vector<PointId> order(n);
  for (PointId p = 0; p < n; ++p) order[p] = p;
  std::stable_sort(order.begin(), order.end(),
                   [&](PointId a, PointId b) { return inst.radius(a) > inst.radius(b); });

  NeighborFinder nf(inst, R);
  DisjointSets sets(n);
  std::vector<char> active(n, 0);
  std::vector<Partition> out(cutoffs.size());
  std::size_t next = 0;
  for (std::size_t level = cutoffs.size(); level-- > 0;) {
    while (next < n && in_annulus(inst.radius(order[next]), cutoffs[level])) {
      const PointId p = order[next++];
      active[p] = 1;
      nf.for_each(p, [&](PointId q, double) {
        if (active[q]) sets.unite(p, q);
      });
    }
    out[level] = detail::snapshot(sets, active);
  }
  return out;
}

/// Components of {x : d(x, xi) >= r} under chains with steps <= R.
inline Partition chain_components(const FiniteCoarseInstance& inst, double r, double R) {
  if (!(R > 0.0)) throw InputError("scale R must be positive");
  const double cut[] = {r};
  return std::move(chain_filtration(inst, cut, R).front());
}

/// Map between component labels induced by inclusion or coarsening.
using ComponentMap = std::map<PointId, PointId>;

struct CellIndex {
  std::size_t r = 0;
  std::size_t R = 0;
  bool operator==(const CellIndex&) const = default;
};

class EndSystem {
 public:
  EndSystem() = default;
  EndSystem(ScaleLadder ladder, std::vector<std::vector<Partition>> cells)
      : ladder_(std::move(ladder)), cells_(std::move(cells)) {}

  const ScaleLadder& ladder() const { return ladder_; }
  std::size_t r_levels() const { return ladder_.r_values.size(); }
  std::size_t R_levels() const { return ladder_.R_values.size(); }
  const Partition& cell(std::size_t ri, std::size_t Ri) const { return cells_.at(ri).at(Ri); }
  const Partition& cell(CellIndex c) const { return cell(c.r, c.R); }
  std::size_t count(std::size_t ri, std::size_t Ri) const { return cell(ri, Ri).count; }

  /// Sends a component at `from` to the component containing it at `to`,
  /// where to.r <= from.r and to.R >= from.R.
  PointId transport(PointId label, CellIndex from, CellIndex to) const {
    if (to.r > from.r || to.R < from.R) throw std::logic_error("transport must go to a coarser cell");
    return cell(to).label_of(label);
  }

  /// Inclusion-induced map from the annulus at ri+1 to the annulus at ri.
  ComponentMap down_map(std::size_t ri, std::size_t Ri) const {
    ComponentMap m;
    for (PointId c : cell(ri + 1, Ri).components()) m[c] = transport(c, {ri + 1, Ri}, {ri, Ri});
    return m;
  }
  /// Coarsening map from scale Ri to scale Ri+1 on the annulus at ri.
  ComponentMap coarsen_map(std::size_t ri, std::size_t Ri) const {
    ComponentMap m;
    for (PointId c : cell(ri, Ri).components()) m[c] = transport(c, {ri, Ri}, {ri, Ri + 1});
    return m;
  }

  /// Sub-system on scales from index `first_R` upward.
  EndSystem restricted_to_scales(std::size_t first_R) const {
    if (first_R >= R_levels()) throw InputError("no scales left after restriction");
    ScaleLadder l{ladder_.r_values, {ladder_.R_values.begin() + first_R, ladder_.R_values.end()}};
    std::vector<std::vector<Partition>> c(r_levels());
    for (std::size_t ri = 0; ri < r_levels(); ++ri) c[ri].assign(cells_[ri].begin() + first_R, cells_[ri].end());
    return EndSystem(std::move(l), std::move(c));
  }

 private:
  ScaleLadder ladder_;
  std::vector<std::vector<Partition>> cells_;  // [r index][R index]
};

/// Worker count from COARSE_JOBS, else 1.
inline std::size_t default_jobs() {
  if (const char* env = std::getenv("COARSE_JOBS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

/// Computes all cells; scales are independent and split across `jobs` workers.
inline EndSystem build_end_system(const FiniteCoarseInstance& inst, const ScaleLadder& ladder,
                                  std::size_t jobs = 1) {
  const std::size_t nR = ladder.R_values.size();
  std::vector<std::vector<Partition>> by_scale(nR);
  auto work = [&](std::size_t worker, std::size_t stride) {
    for (std::size_t Ri = worker; Ri < nR; Ri += stride)
      by_scale[Ri] = chain_filtration(inst, ladder.r_values, ladder.R_values[Ri]);
  };
  jobs = std::clamp<std::size_t>(jobs, 1, nR);
  if (jobs == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < jobs; ++w) pool.emplace_back(work, w, jobs);
  }
  std::vector<std::vector<Partition>> cells(ladder.r_values.size(), std::vector<Partition>(nR));
  for (std::size_t Ri = 0; Ri < nR; ++Ri)
    for (std::size_t ri = 0; ri < ladder.r_values.size(); ++ri) cells[ri][Ri] = std::move(by_scale[Ri][ri]);
  return EndSystem(ladder, std::move(cells));
}

/// A compatible choice of component at every cut-off, at one scale.
struct Thread {
  /// Label of the component at the outermost annulus.
  PointId representative = kNoPoint;
  /// Component label at each r level, innermost first.
  std::vector<PointId> path;
};

inline std::vector<Thread> threads(const EndSystem& sys, std::size_t Ri) {
  const std::size_t top = sys.r_levels() - 1;
  std::vector<Thread> out;
  for (PointId c : sys.cell(top, Ri).components()) {
    Thread t;
    t.representative = c;
    t.path.resize(sys.r_levels());
    for (std::size_t ri = 0; ri <= top; ++ri) t.path[ri] = sys.transport(c, {top, Ri}, {ri, Ri});
    out.push_back(std::move(t));
  }
  return out;
}

enum class Stability { stabilized, sparse, inconclusive };

inline std::string_view to_string(Stability s) {
  switch (s) {
    case Stability::stabilized: return "stabilized";
    case Stability::sparse: return "sparse";
    case Stability::inconclusive: return "inconclusive";
  }
  return "?";
}

struct StabilityReport {
  Stability status = Stability::inconclusive;
  /// Stable count k when status is stabilized.
  std::size_t stable_count = 0;
  std::size_t window = 3;
  std::vector<std::size_t> window_r;  // r indices of the top-right window
  std::vector<std::size_t> window_R;  // R indices of the top-right window
  std::vector<double> r_values;
  std::vector<double> R_values;
  std::vector<std::vector<std::size_t>> counts;  // [r index][R index]

  bool operator==(const StabilityReport&) const = default;
};

inline bool is_bijection(const ComponentMap& m, std::size_t target_count) {
  if (m.size() != target_count) return false;
  std::vector<PointId> images;
  for (auto [k, v] : m) images.push_back(v);
  std::sort(images.begin(), images.end());
  return std::adjacent_find(images.begin(), images.end()) == images.end();
}

/// Stabilized(k): every count in the top-right q x q window equals k and all
/// transition maps inside it are bijective. Sparse: at every window scale the
/// count strictly grows as the cut-off moves inward. Otherwise inconclusive.
inline StabilityReport stable_end_count(const EndSystem& sys, std::size_t q = 3) {
  if (q == 0 || sys.r_levels() < q || sys.R_levels() < q)
    throw InputError("ladder too small for a " + std::to_string(q) + "x" + std::to_string(q) + " window");
  StabilityReport rep;
  rep.window = q;
  rep.r_values = sys.ladder().r_values;
  rep.R_values = sys.ladder().R_values;
  rep.counts.assign(sys.r_levels(), std::vector<std::size_t>(sys.R_levels()));
  for (std::size_t ri = 0; ri < sys.r_levels(); ++ri)
    for (std::size_t Ri = 0; Ri < sys.R_levels(); ++Ri) rep.counts[ri][Ri] = sys.count(ri, Ri);
  for (std::size_t i = sys.r_levels() - q; i < sys.r_levels(); ++i) rep.window_r.push_back(i);
  for (std::size_t i = sys.R_levels() - q; i < sys.R_levels(); ++i) rep.window_R.push_back(i);

  const std::size_t k = rep.counts[rep.window_r.front()][rep.window_R.front()];
  bool stable = true;
  for (std::size_t ri : rep.window_r)
    for (std::size_t Ri : rep.window_R) stable = stable && rep.counts[ri][Ri] == k;
  for (std::size_t a = 0; stable && a + 1 < q; ++a)
    for (std::size_t Ri : rep.window_R)
      stable = stable && is_bijection(sys.down_map(rep.window_r[a], Ri), k);
  for (std::size_t ri : rep.window_r)
    for (std::size_t b = 0; stable && b + 1 < q; ++b)
      stable = stable && is_bijection(sys.coarsen_map(ri, rep.window_R[b]), k);
  if (stable) {
    rep.status = Stability::stabilized;
    rep.stable_count = k;
    return rep;
  }

  bool sparse = true;
  for (std::size_t Ri : rep.window_R)
    for (std::size_t a = 0; a + 1 < q; ++a)
      sparse = sparse && rep.counts[rep.window_r[a]][Ri] > rep.counts[rep.window_r[a + 1]][Ri];
  rep.status = sparse ? Stability::sparse : Stability::inconclusive;
  return rep;
}

}  // namespace coarse
