#pragma once
// Finite-scale decision procedures: boundedness, control, coarse
// connectedness, bornology, properness, coarse homotopy, Archimedean-ness.
// All suprema are taken in the extended reals.

#include <optional>

#include "coarse/core.hpp"
#include "coarse/neighbors.hpp"

namespace coarse {

/// Largest pairwise distance in S. A set is bounded at scale R iff this is <= R.
inline double subset_diameter(const FiniteCoarseInstance& inst, std::span<const PointId> subset) {
  if (subset.empty()) throw InputError("subset_diameter of an empty set");
  double best = 0.0;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (inst.is_graph()) {
      const auto row = inst.distances_from(subset[i]);
      for (std::size_t j = i + 1; j < subset.size(); ++j) best = std::max(best, row.at(subset[j]));
    } else {
      for (std::size_t j = i + 1; j < subset.size(); ++j)
        best = std::max(best, inst.distance(subset[i], subset[j]));
    }
  }
  return best;
}

/// sup of d(x, y) over the relation; the relation is controlled at level R
/// iff the result is <= R. The empty relation has level 0.
inline double controlled_level(const FiniteCoarseInstance& inst,
                               std::span<const std::pair<PointId, PointId>> pairs) {
  double best = 0.0;
  for (auto [x, y] : pairs) best = std::max(best, inst.distance(x, y));
  return best;
}

/// True iff no pair is at distance +inf. Always true for clouds.
inline bool is_coarsely_connected(const FiniteCoarseInstance& inst) {
  if (!inst.is_graph()) return true;
  const auto row = detail::dijkstra(inst.adjacency(), 0);
  return std::all_of(row.begin(), row.end(), [](double d) { return std::isfinite(d); });
}

struct BornologousModulus {
  std::vector<double> scales;
  /// modulus[i] = sup { d(f x, f y) : d(x, y) <= scales[i] }.
  std::vector<double> modulus;
  /// False when some modulus entry is +inf.
  bool bounded = true;
};

/// One neighbor pass at the largest scale; each close pair updates every
/// scale it fits under.
inline BornologousModulus bornologous_modulus(const CoarseMapSample& f, std::span<const double> scales) {
  BornologousModulus out;
  out.scales.assign(scales.begin(), scales.end());
  out.modulus.assign(scales.size(), 0.0);
  if (scales.empty()) return out;
  const auto& src = f.source();
  const auto& tgt = f.target();
  NeighborFinder nf(src, *std::max_element(scales.begin(), scales.end()));
  std::vector<std::pair<PointId, double>> close;
  std::vector<PointId> images;
  std::vector<double> image_dist;
  for (PointId x = 0; x < src.size(); ++x) {
    close.clear();
    nf.for_each(x, [&](PointId y, double d) {
      if (y > x) close.emplace_back(f(y), d);
    });
    if (close.empty()) continue;
    const PointId fx = f(x);
    image_dist.resize(close.size());
    if (tgt.is_graph() && tgt.size() >= FiniteCoarseInstance::kRowCacheLimit) {
      images.clear();
      for (const auto& c : close) images.push_back(c.first);
      const auto row = detail::dijkstra(tgt.adjacency(), fx, kInfinity, images);
      for (std::size_t i = 0; i < close.size(); ++i) image_dist[i] = row[close[i].first];
    } else {
      for (std::size_t i = 0; i < close.size(); ++i) image_dist[i] = tgt.distance(fx, close[i].first);
    }
    for (std::size_t i = 0; i < close.size(); ++i)
      for (std::size_t s = 0; s < scales.size(); ++s)
        if (within(close[i].second, scales[s])) out.modulus[s] = std::max(out.modulus[s], image_dist[i]);
  }
  for (double m : out.modulus)
    if (!std::isfinite(m)) out.bounded = false;
  return out;
}

struct PropernessReport {
  /// Radii r of the target balls B(eta, r).
  std::vector<double> radii;
  /// Max distance from xi over f^-1(B(eta, r)); empty when the preimage is.
  std::vector<std::optional<double>> preimage_radius;
  /// All preimage radii finite and strictly inside the source truncation.
  bool proper = true;
};

inline PropernessReport properness_report(const CoarseMapSample& f, std::span<const double> radii) {
  PropernessReport out;
  out.radii.assign(radii.begin(), radii.end());
  const auto& src = f.source();
  const auto& tgt = f.target();
  for (double r : radii) {
    std::optional<double> worst;
    for (PointId x = 0; x < src.size(); ++x) {
      if (!within(tgt.radius(f(x)), r)) continue;
      worst = std::max(worst.value_or(0.0), src.radius(x));
    }
    out.preimage_radius.push_back(worst);
    if (worst && (!std::isfinite(*worst) || !(*worst < src.truncation_radius() * (1.0 - kRelTol))))
      out.proper = false;
  }
  return out;
}

/// sup_x d(f x, g x); finite exactly when f and g are close at that scale.
inline double homotopy_distance(const CoarseMapSample& f, const CoarseMapSample& g) {
  if (f.source_ptr() != g.source_ptr() || f.target_ptr() != g.target_ptr())
    throw InputError("homotopy_distance needs maps with the same source and target");
  double best = 0.0;
  for (PointId x = 0; x < f.source().size(); ++x) best = std::max(best, f.target().distance(f(x), g(x)));
  return best;
}

struct ArchimedeanResult {
  bool chain_connected = false;
  /// Largest hop distance between two points joined by an R-chain.
  std::size_t max_hops = 0;
};

/// Whole space E_R-chain connected. Hop diameter costs one breadth-first
/// search per point.
inline ArchimedeanResult archimedean_check(const FiniteCoarseInstance& inst, double R) {
  const std::size_t n = inst.size();
  std::vector<std::vector<PointId>> adj(n);
  NeighborFinder nf(inst, R);
  for (PointId p = 0; p < n; ++p) adj[p] = nf.sorted_neighbors(p);

  ArchimedeanResult out;
  std::vector<std::size_t> hops(n);
  std::vector<PointId> queue;
  queue.reserve(n);
  for (PointId s = 0; s < n; ++s) {
    std::fill(hops.begin(), hops.end(), std::numeric_limits<std::size_t>::max());
    queue.clear();
    hops[s] = 0;
    queue.push_back(s);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const PointId v = queue[head];
      for (PointId w : adj[v]) {
        if (hops[w] != std::numeric_limits<std::size_t>::max()) continue;
        hops[w] = hops[v] + 1;
        out.max_hops = std::max(out.max_hops, hops[w]);
        queue.push_back(w);
      }
    }
    if (s == inst.basepoint()) out.chain_connected = queue.size() == n;
  }
  return out;
}

}  // namespace coarse
