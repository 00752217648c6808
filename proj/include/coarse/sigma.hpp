#pragma once
// Escape chains (finite coarse sequences from the base point), their classes
// in the end system, and the comparison map from sequence classes to threads.

#include <optional>

#include "coarse/end_maps.hpp"
#include "coarse/filtration.hpp"

namespace coarse {

/// A step-<=R path from the base point to the escape shell.
struct EscapeChain {
  double scale = 0.0;
  std::vector<PointId> points;  // points.front() is the base point
  double shell_radius = 0.0;
};

namespace detail {

struct BaseSearch {
  std::vector<PointId> parent;  // kNoPoint when unreached
  std::vector<PointId> order;   // discovery order, base point first
};

/// Breadth-first search from the base point over step-<=R pairs; neighbors
/// are expanded in ascending id order so results are deterministic. In a
/// graph two vertices are R-close exactly when a path of length <= R joins
/// them, so R-chains there are paths over edges of weight <= R and only
/// those edges are searched.
inline BaseSearch search_from_base(const FiniteCoarseInstance& inst, double R) {
  BaseSearch out;
  out.parent.assign(inst.size(), kNoPoint);
  const PointId base = inst.basepoint();
  out.parent[base] = base;
  out.order.push_back(base);
  if (inst.is_graph()) {
    std::vector<PointId> next;
    for (std::size_t head = 0; head < out.order.size(); ++head) {
      const PointId v = out.order[head];
      next.clear();
      for (const auto& arc : inst.adjacency().out(v))
        if (within(arc.weight, R) && out.parent[arc.to] == kNoPoint) next.push_back(arc.to);
      std::sort(next.begin(), next.end());
      for (PointId w : next) {
        if (out.parent[w] != kNoPoint) continue;
        out.parent[w] = v;
        out.order.push_back(w);
      }
    }
    return out;
  }
  NeighborFinder nf(inst, R);
  for (std::size_t head = 0; head < out.order.size(); ++head) {
    const PointId v = out.order[head];
    for (PointId w : nf.sorted_neighbors(v)) {
      if (out.parent[w] != kNoPoint) continue;
      out.parent[w] = v;
      out.order.push_back(w);
    }
  }
  return out;
}

/// Search-tree path from the base point. Graph paths are thinned greedily to
/// the farthest vertex within path length R, so steps stay <= R.
inline std::vector<PointId> path_to(const FiniteCoarseInstance& inst, const BaseSearch& s, PointId end, double R) {
  std::vector<PointId> path{end};
  while (s.parent[path.back()] != path.back()) path.push_back(s.parent[path.back()]);
  std::reverse(path.begin(), path.end());
  if (!inst.is_graph() || path.size() < 3) return path;
  std::vector<double> along(path.size(), 0.0);
  for (std::size_t i = 1; i < path.size(); ++i) {
    double w = kInfinity;
    for (const auto& arc : inst.adjacency().out(path[i - 1]))
      if (arc.to == path[i]) w = std::min(w, arc.weight);
    along[i] = along[i - 1] + w;
  }
  std::vector<PointId> thin{path.front()};
  std::size_t at = 0;
  while (at + 1 < path.size()) {
    std::size_t j = at + 1;
    while (j + 1 < path.size() && within(along[j + 1] - along[at], R)) ++j;
    thin.push_back(path[j]);
    at = j;
  }
  return thin;
}

inline void check_margin(double margin) {
  if (!(margin > 0.0 && margin < 1.0)) throw InputError("escape margin must lie in (0, 1)");
}

}  // namespace detail

/// Radius from which a point counts as having reached the shell.
inline double escape_shell(const FiniteCoarseInstance& inst, double margin, double outer_cutoff = 0.0) {
  return std::max((1.0 - margin) * inst.truncation_radius(), outer_cutoff);
}

/// Breadth-first step-<=R path from the base point to the first shell point
/// discovered; absent when no such path exists inside the truncation.
inline std::optional<EscapeChain> find_escape_chain(const FiniteCoarseInstance& inst, double R,
                                                    double margin = 0.1, double outer_cutoff = 0.0) {
  detail::check_margin(margin);
  if (!(R > 0.0)) throw InputError("scale R must be positive");
  const double shell = escape_shell(inst, margin, outer_cutoff);
  const auto search = detail::search_from_base(inst, R);
  for (PointId p : search.order) {
    if (p == inst.basepoint() || !in_annulus(inst.radius(p), shell)) continue;
    return EscapeChain{R, detail::path_to(inst, search, p, R), shell};
  }
  return std::nullopt;
}

struct SigmaScale {
  double scale = 0.0;
  bool exists = false;
  std::optional<EscapeChain> chain;
  /// Outermost-annulus components hit by escape chains, ascending.
  std::vector<PointId> classes;
  /// A reached shell point for each class.
  std::map<PointId, PointId> witnesses;
};

struct SigmaReport {
  double margin = 0.1;
  double shell_radius = 0.0;
  std::vector<SigmaScale> per_scale;
  /// merges[i]: classes at scale i -> classes at scale i+1.
  std::vector<ComponentMap> merges;
  /// Classes at the coarsest ladder scale.
  std::vector<PointId> classes;
};

/// Two escape chains are equivalent when their shell points fall in the same
/// outermost component, i.e. the same thread.
inline SigmaReport sigma_report(const FiniteCoarseInstance& inst, const EndSystem& sys, double margin = 0.1) {
  detail::check_margin(margin);
  const std::size_t top = sys.r_levels() - 1;
  SigmaReport rep;
  rep.margin = margin;
  rep.shell_radius = escape_shell(inst, margin, sys.ladder().r_values[top]);
  for (std::size_t Ri = 0; Ri < sys.R_levels(); ++Ri) {
    SigmaScale s;
    s.scale = sys.ladder().R_values[Ri];
    const auto search = detail::search_from_base(inst, s.scale);
    const auto& outer = sys.cell(top, Ri);
    for (PointId p : search.order) {
      if (p == inst.basepoint() || !in_annulus(inst.radius(p), rep.shell_radius)) continue;
      if (!s.chain) s.chain = EscapeChain{s.scale, detail::path_to(inst, search, p, s.scale), rep.shell_radius};
      s.witnesses.emplace(outer.label_of(p), p);
    }
    s.exists = s.chain.has_value();
    for (const auto& [c, w] : s.witnesses) s.classes.push_back(c);
    rep.per_scale.push_back(std::move(s));
  }
  for (std::size_t Ri = 0; Ri + 1 < sys.R_levels(); ++Ri) {
    ComponentMap m;
    for (PointId c : rep.per_scale[Ri].classes) m[c] = sys.transport(c, {top, Ri}, {top, Ri + 1});
    rep.merges.push_back(std::move(m));
  }
  rep.classes = rep.per_scale.back().classes;
  return rep;
}

struct OmegaMap {
  std::size_t scale_index = 0;
  /// Class label -> index into threads(system, scale_index).
  std::map<PointId, std::size_t> class_to_thread;
  std::size_t thread_count = 0;
  bool injective = true;
  bool surjective = false;
  bool bijective() const { return injective && surjective; }
};

/// Sends each class at the given scale (default: coarsest) to its thread.
inline OmegaMap omega_map(const SigmaReport& rep, const EndSystem& sys, std::optional<std::size_t> scale_index = {}) {
  OmegaMap om;
  om.scale_index = scale_index.value_or(sys.R_levels() - 1);
  const auto ts = threads(sys, om.scale_index);
  om.thread_count = ts.size();
  std::set<std::size_t> hit;
  for (PointId c : rep.per_scale.at(om.scale_index).classes) {
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (ts[i].representative != c) continue;
      om.class_to_thread[c] = i;
      om.injective = om.injective && hit.insert(i).second;
    }
  }
  om.surjective = hit.size() == ts.size();
  return om;
}

struct NaturalityCheck {
  std::size_t checked = 0;
  std::size_t violations = 0;
  /// Images whose class is not among the target's escape classes.
  std::size_t outside_target_classes = 0;
};

/// Compares induced_end_map(f) after omega_X against omega_Y after the class
/// map of f, at every source scale with a matched outermost cell.
inline NaturalityCheck check_naturality(const CoarseMapSample& f, const EndSystem& X, const SigmaReport& sx,
                                        const EndSystem& Y, const SigmaReport& sy, const InducedEndMap& ind) {
  NaturalityCheck out;
  const std::size_t topX = X.r_levels() - 1;
  const std::size_t topY = Y.r_levels() - 1;
  for (std::size_t Ri = 0; Ri < X.R_levels(); ++Ri) {
    const CellMap* cm = ind.find({topX, Ri});
    if (!cm) continue;
    const auto& y_outer = Y.cell(topY, cm->target.R);
    const auto& y_classes = sy.per_scale.at(cm->target.R).classes;
    for (const auto& [c, shell_point] : sx.per_scale.at(Ri).witnesses) {
      ++out.checked;
      const PointId left = cm->components.at(c);
      const PointId image = f(shell_point);
      PointId right = Y.cell(cm->target).label_of(image);
      if (y_outer.contains(image)) {
        const PointId y_class = y_outer.label_of(image);
        if (!std::binary_search(y_classes.begin(), y_classes.end(), y_class)) ++out.outside_target_classes;
        right = Y.transport(y_class, {topY, cm->target.R}, cm->target);
      }
      if (left != right) ++out.violations;
    }
  }
  return out;
}

}  // namespace coarse
