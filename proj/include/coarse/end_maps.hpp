#pragma once
// Maps of end systems induced by a coarse map sample, and the comparisons
// used to state functoriality and coarse-homotopy invariance cell-wise.

#include <set>
#include <string>

#include "coarse/checks.hpp"
#include "coarse/filtration.hpp"

namespace coarse {

/// Component map from one source cell into the matched target cell.
struct CellMap {
  CellIndex source;
  CellIndex target;
  ComponentMap components;
};

struct InducedEndMap {
  bool defined = false;
  std::string failure;
  BornologousModulus modulus;
  PropernessReport properness;
  /// Matched source cells; cells whose modulus exceeds every target scale are absent.
  std::vector<CellMap> cells;

  const CellMap* find(CellIndex c) const {
    for (const auto& m : cells)
      if (m.source == c) return &m;
    return nullptr;
  }
};

/// For every source cell (r, R): the target scale is the least ladder scale
/// >= S(R), and the target cut-off is the largest ladder r' with
/// f(annulus(r)) inside annulus(r'). Fails when f is not bornologous or not
/// proper at the ladder scales.
inline InducedEndMap induced_end_map(const CoarseMapSample& f, const EndSystem& X, const EndSystem& Y) {
  InducedEndMap out;
  out.modulus = bornologous_modulus(f, X.ladder().R_values);
  out.properness = properness_report(f, Y.ladder().r_values);
  if (!out.modulus.bounded) {
    out.failure = "map is not bornologous at ladder scales";
    return out;
  }
  if (!out.properness.proper) {
    out.failure = "map is not proper at ladder scales";
    return out;
  }

  const auto& src = f.source();
  const auto& tgt = f.target();
  const auto& rX = X.ladder().r_values;
  const auto& rY = Y.ladder().r_values;
  const auto& RY = Y.ladder().R_values;

  for (std::size_t ri = 0; ri < X.r_levels(); ++ri) {
    double lowest = kInfinity;
    for (PointId x = 0; x < src.size(); ++x)
      if (in_annulus(src.radius(x), rX[ri])) lowest = std::min(lowest, tgt.radius(f(x)));
    std::size_t target_r = 0;
    for (std::size_t j = 0; j < rY.size(); ++j)
      if (in_annulus(lowest, rY[j])) target_r = j;

    for (std::size_t Ri = 0; Ri < X.R_levels(); ++Ri) {
      std::size_t target_R = RY.size();
      for (std::size_t j = 0; j < RY.size() && target_R == RY.size(); ++j)
        if (within(out.modulus.modulus[Ri], RY[j])) target_R = j;
      if (target_R == RY.size()) continue;

      CellMap cm{{ri, Ri}, {target_r, target_R}, {}};
      const auto& from = X.cell(ri, Ri);
      const auto& to = Y.cell(target_r, target_R);
      for (PointId x = 0; x < src.size(); ++x) {
        if (!from.contains(x)) continue;
        const PointId image = to.label_of(f(x));
        auto [it, fresh] = cm.components.emplace(from.label_of(x), image);
        if (image == kNoPoint || it->second != image) {
          out.failure = "component map is not well defined";
          out.cells.clear();
          return out;
        }
      }
      out.cells.push_back(std::move(cm));
    }
  }
  out.defined = true;
  return out;
}

/// Pushes a cell map's values forward to a coarser target cell.
inline ComponentMap push_forward(const CellMap& m, const EndSystem& Y, CellIndex to) {
  ComponentMap out;
  for (auto [c, img] : m.components) out[c] = Y.transport(img, m.target, to);
  return out;
}

/// Compares two cell maps with the same source cell after pushing both into
/// their common coarsening (smaller cut-off, larger scale), raised to at
/// least scale index `min_R`. Returns the number of disagreeing components.
inline std::size_t disagreements(const CellMap& a, const CellMap& b, const EndSystem& Y, std::size_t min_R = 0) {
  if (!(a.source == b.source)) throw std::logic_error("cell maps have different source cells");
  const CellIndex common{std::min(a.target.r, b.target.r), std::max({a.target.R, b.target.R, min_R})};
  const auto pa = push_forward(a, Y, common);
  const auto pb = push_forward(b, Y, common);
  std::size_t bad = 0;
  for (auto [c, img] : pa) {
    auto it = pb.find(c);
    if (it == pb.end() || it->second != img) ++bad;
  }
  return bad + (pb.size() > pa.size() ? pb.size() - pa.size() : 0);
}

/// g's cell map applied after f's cell map, when g has a matching cell.
inline std::optional<CellMap> compose(const CellMap& f_cell, const InducedEndMap& g) {
  const CellMap* g_cell = g.find(f_cell.target);
  if (!g_cell) return std::nullopt;
  CellMap out{f_cell.source, g_cell->target, {}};
  for (auto [c, img] : f_cell.components) out.components[c] = g_cell->components.at(img);
  return out;
}

struct ThreadMap {
  CellIndex source;
  CellIndex target;
  /// Source thread representative -> target thread representatives whose
  /// component at the target cut-off is the image.
  std::map<PointId, std::vector<PointId>> images;
  bool bijective = false;
};

/// Threads at source scale index Ri against the threads at the matched
/// target scale.
inline std::optional<ThreadMap> thread_map(const InducedEndMap& ind, const EndSystem& X, const EndSystem& Y,
                                           std::size_t Ri) {
  const CellMap* cm = ind.find({X.r_levels() - 1, Ri});
  if (!cm) return std::nullopt;
  ThreadMap tm{cm->source, cm->target, {}, false};
  const auto y_threads = threads(Y, cm->target.R);
  std::set<PointId> hit;
  bool one_each = true;
  for (auto [c, img] : cm->components) {
    auto& list = tm.images[c];
    for (const auto& t : y_threads)
      if (t.path[cm->target.r] == img) list.push_back(t.representative);
    one_each = one_each && list.size() == 1;
    if (list.size() == 1) hit.insert(list.front());
  }
  tm.bijective = one_each && hit.size() == tm.images.size() && hit.size() == y_threads.size();
  return tm;
}

}  // namespace coarse
