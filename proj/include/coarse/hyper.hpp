#pragma once
// Symbolic points in polynomial parameter spaces and the certificate checks
// that classify their infinite points: chain schemas connect, gap
// certificates separate.

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "coarse/filtration.hpp"
#include "coarse/poly.hpp"

namespace coarse::hyper {

struct SymbolicPoint {
  std::vector<Poly> coords;
  Rational t0 = 1;

  std::size_t dim() const { return coords.size(); }
};

enum class Norm { euclidean, sup };

inline std::string_view to_string(Norm n) { return n == Norm::euclidean ? "euclidean" : "sup"; }

inline Norm parse_norm(std::string_view s) {
  if (s == "euclidean") return Norm::euclidean;
  if (s == "sup" || s == "chebyshev") return Norm::sup;
  throw InputError("unknown norm '" + std::string(s) + "'");
}

enum class PieceKind { ray, segment, ambient };

inline std::string_view to_string(PieceKind k) {
  switch (k) {
    case PieceKind::ray: return "ray";
    case PieceKind::segment: return "segment";
    case PieceKind::ambient: return "ambient";
  }
  return "?";
}

/// A ray s -> coords(s) on [from, inf), a segment on [from, to], or the
/// whole ambient space (optionally only its integer lattice).
struct Piece {
  std::string name;
  PieceKind kind = PieceKind::ray;
  std::vector<Poly> coords;
  Rational from = 0;
  Rational to = 0;
  bool lattice = false;

  bool affine() const {
    return std::all_of(coords.begin(), coords.end(), [](const Poly& p) { return p.degree() <= 1; });
  }
};

struct ParametricSpace {
  std::string name;
  std::size_t dim = 0;
  Norm norm = Norm::euclidean;
  std::vector<Rational> basepoint;
  std::vector<Piece> pieces;

  std::size_t piece_index(const std::string& piece) const {
    for (std::size_t i = 0; i < pieces.size(); ++i)
      if (pieces[i].name == piece) return i;
    throw InputError("unknown piece '" + piece + "'");
  }
};

inline std::vector<Poly> constant_coords(const std::vector<Rational>& v) {
  std::vector<Poly> out;
  for (const auto& x : v) out.push_back(Poly::constant(x));
  return out;
}

/// Squared Euclidean distance polynomial.
inline Poly squared_distance(const std::vector<Poly>& a, const std::vector<Poly>& b) {
  if (a.size() != b.size()) throw InputError("dimension mismatch between symbolic points");
  Poly acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc = acc + (a[i] - b[i]) * (a[i] - b[i]);
  return acc;
}

inline bool finitely_close(const SymbolicPoint& p, const SymbolicPoint& q) {
  return poly_is_bounded(squared_distance(p.coords, q.coords));
}

// ---------------------------------------------------------------- membership

/// A point formula in (t, k) with k ranging over 0..kmax(t), t >= t0.
struct FormulaDomain {
  std::vector<Poly2> formula;
  Rational t0 = 1;
  Poly kmax;
};

struct Membership {
  bool holds = false;
  Verdict verdict = Verdict::refuted;
  std::optional<Rational> t, k;
  std::string reason;
};

namespace detail {

/// A point of the domain where p is nonzero, searched over a small grid.
inline std::pair<Rational, Rational> nonzero_witness(const Poly2& p, const FormulaDomain& d) {
  const Integer start = ceil_of(d.t0);
  for (Integer t = start; t <= start + 64; ++t) {
    const Integer top = std::min<Integer>(floor_of(d.kmax(Rational(t))), 64);
    for (Integer k = 0; k <= top; ++k)
      if (p(Rational(t), Rational(k)) != 0) return {Rational(t), Rational(k)};
  }
  return {Rational(start), Rational(0)};
}

inline Membership fail(std::string reason, std::optional<Rational> t = {}, std::optional<Rational> k = {}) {
  return Membership{false, Verdict::refuted, std::move(t), std::move(k), std::move(reason)};
}

inline Membership from_decision(const Decision& d, const std::string& what) {
  if (!d.ok()) return fail(what, d.t, d.k);
  return Membership{true, d.verdict, {}, {}, {}};
}

}  // namespace detail

/// Whether every point of the formula over its domain lies on the piece.
/// Exact when the piece has a coordinate affine in s: s is solved from it,
/// the other coordinates become polynomial identities and the parameter
/// range becomes a sign condition.
inline Membership membership_check(const FormulaDomain& d, const Piece& piece) {
  if (d.formula.size() != piece.coords.size() && piece.kind != PieceKind::ambient)
    return detail::fail("dimension mismatch");
  // A small constant range of k is checked one step at a time, so identities
  // only need to hold where k actually ranges.
  const bool uses_k = std::any_of(d.formula.begin(), d.formula.end(), [](const Poly2& f) { return f.k_degree() >= 1; });
  if (uses_k && d.kmax.is_constant() && d.kmax.coeff(0) <= SamplingLimits{}.small_constant_range) {
    Membership all{true, Verdict::proved, {}, {}, {}};
    for (Integer k = 0; k <= floor_of(d.kmax.coeff(0)); ++k) {
      FormulaDomain single{{}, d.t0, Poly()};
      for (const auto& f : d.formula) single.formula.emplace_back(f.at_k(Poly::constant(Rational(k))));
      Membership m = membership_check(single, piece);
      if (!m.holds) {
        m.k = Rational(k);
        return m;
      }
      if (m.verdict == Verdict::sampled) all.verdict = Verdict::sampled;
    }
    return all;
  }
  if (piece.kind == PieceKind::ambient) {
    if (!piece.lattice) return Membership{true, Verdict::proved, {}, {}, {}};
    for (const auto& c : d.formula) {
      if (integer_valued(c)) continue;
      const Integer start = ceil_of(d.t0);
      for (Integer t = start; t <= start + 64; ++t)
        for (Integer k = 0; k <= std::min<Integer>(floor_of(d.kmax(Rational(t))), 64); ++k)
          if (denominator(c(Rational(t), Rational(k))) != 1)
            return detail::fail("coordinate is not an integer", Rational(t), Rational(k));
      return detail::fail("coordinate is not integer-valued");
    }
    return Membership{true, Verdict::proved, {}, {}, {}};
  }

  std::optional<std::size_t> solver;
  for (std::size_t i = 0; i < piece.coords.size() && !solver; ++i)
    if (piece.coords[i].degree() == 1) solver = i;
  if (!solver) {
    // A constant piece is a single point.
    if (std::all_of(piece.coords.begin(), piece.coords.end(), [](const Poly& p) { return p.is_constant(); })) {
      for (std::size_t i = 0; i < piece.coords.size(); ++i) {
        const Poly2 diff = d.formula[i] - Poly2(piece.coords[i]);
        if (!diff.is_zero()) {
          auto [t, k] = detail::nonzero_witness(diff, d);
          return detail::fail("off the piece", t, k);
        }
      }
      return Membership{true, Verdict::proved, {}, {}, {}};
    }
    return detail::fail("piece has no coordinate affine in its parameter");
  }

  const Poly& c = piece.coords[*solver];
  const Rational slope = c.coeff(1);
  // s(t, k) = (F_solver - c0) / slope
  const Poly2 s = Poly2(Poly::constant(1 / slope)) * (d.formula[*solver] - Poly2(Poly::constant(c.coeff(0))));
  for (std::size_t i = 0; i < piece.coords.size(); ++i) {
    const Poly2 diff = compose(piece.coords[i], s) - d.formula[i];
    if (!diff.is_zero()) {
      auto [t, k] = detail::nonzero_witness(diff, d);
      return detail::fail("off the piece", t, k);
    }
  }
  Membership out = detail::from_decision(nonneg_on_domain(s - Poly2(Poly::constant(piece.from)), d.t0, d.kmax),
                                         "parameter below the start of the piece");
  if (!out.holds || piece.kind == PieceKind::ray) return out;
  Membership upper = detail::from_decision(nonneg_on_domain(Poly2(Poly::constant(piece.to)) - s, d.t0, d.kmax),
                                           "parameter beyond the end of the segment");
  if (!upper.holds) return upper;
  out.verdict = combine(Decision{out.verdict, {}, {}}, Decision{upper.verdict, {}, {}}).verdict;
  return out;
}

/// Membership in the union of pieces. With a small constant step count each
/// point may use its own piece; otherwise one piece must hold the formula.
inline Membership on_space(const FormulaDomain& d, const ParametricSpace& space, SamplingLimits lim = {}) {
  auto best_piece = [&](const FormulaDomain& dd) {
    Membership last = detail::fail("no pieces");
    std::optional<Membership> sampled;
    for (const auto& piece : space.pieces) {
      Membership m = membership_check(dd, piece);
      if (m.holds && m.verdict == Verdict::proved) return m;
      if (m.holds) sampled = m;
      else if (!last.t && m.t) last = m;
      else if (last.reason == "no pieces") last = m;
    }
    if (sampled) return *sampled;
    last.reason = "not on any piece (" + last.reason + ")";
    return last;
  };
  if (d.kmax.is_constant() && d.kmax.coeff(0) <= lim.small_constant_range) {
    Membership all{true, Verdict::proved, {}, {}, {}};
    for (Integer k = 0; k <= floor_of(d.kmax.coeff(0)); ++k) {
      FormulaDomain single{{}, d.t0, Poly()};
      for (const auto& f : d.formula) single.formula.emplace_back(f.at_k(Poly::constant(Rational(k))));
      Membership m = best_piece(single);
      if (!m.holds) {
        m.k = Rational(k);
        return m;
      }
      if (m.verdict == Verdict::sampled) all.verdict = Verdict::sampled;
    }
    return all;
  }
  return best_piece(d);
}

inline Membership on_space(const SymbolicPoint& p, const ParametricSpace& space) {
  FormulaDomain d{{}, p.t0, Poly()};
  for (const auto& c : p.coords) d.formula.emplace_back(c);
  return on_space(d, space);
}

/// Names of the pieces holding p.
inline std::vector<std::string> pieces_holding(const SymbolicPoint& p, const ParametricSpace& space) {
  FormulaDomain d{{}, p.t0, Poly()};
  for (const auto& c : p.coords) d.formula.emplace_back(c);
  std::vector<std::string> out;
  for (const auto& piece : space.pieces)
    if (membership_check(d, piece).holds) out.push_back(piece.name);
  return out;
}

/// Checks dimensions, segment affinity and that the base point lies on a piece.
inline void validate(const ParametricSpace& space) {
  if (space.dim == 0) throw InputError("space dimension must be positive");
  if (space.basepoint.size() != space.dim) throw InputError("base point dimension mismatch");
  if (space.pieces.empty()) throw InputError("space has no pieces");
  std::set<std::string> names;
  for (const auto& piece : space.pieces) {
    if (!names.insert(piece.name).second) throw InputError("duplicate piece '" + piece.name + "'");
    if (piece.kind == PieceKind::ambient) continue;
    if (piece.coords.size() != space.dim) throw InputError("piece '" + piece.name + "' has the wrong dimension");
    if (piece.kind == PieceKind::segment && !piece.affine())
      throw InputError("segment '" + piece.name + "' is not affine");
    if (piece.kind == PieceKind::segment && piece.to < piece.from)
      throw InputError("segment '" + piece.name + "' has an empty range");
  }
  if (!on_space(SymbolicPoint{constant_coords(space.basepoint), 0}, space).holds)
    throw InputError("base point lies on no piece");
}

inline bool is_infinite(const SymbolicPoint& p, const ParametricSpace& space) {
  if (p.dim() != space.dim) throw InputError("dimension mismatch between point and space");
  const Membership m = on_space(p, space);
  if (!m.holds) throw InputError("point is not on any piece: " + m.reason);
  return squared_distance(p.coords, constant_coords(space.basepoint)).degree() >= 1;
}

// ---------------------------------------------------------------- chain schemas

struct SchemaSegment {
  std::vector<Poly2> formula;
  Poly steps;  // k = 0..steps(t)
};

struct ChainSchema {
  std::string name;
  Rational scale = 1;
  Rational t0 = 1;
  Poly escape_bound;
  std::vector<SchemaSegment> segments;

  SymbolicPoint start() const {
    SymbolicPoint p{{}, t0};
    for (const auto& f : segments.front().formula) p.coords.push_back(f.at_k(Poly()));
    return p;
  }
  SymbolicPoint end() const {
    SymbolicPoint p{{}, t0};
    for (const auto& f : segments.back().formula) p.coords.push_back(f.at_k(segments.back().steps));
    return p;
  }
};

struct ClauseResult {
  std::string clause;
  std::size_t segment = 0;
  Verdict verdict = Verdict::proved;
  std::optional<Rational> t, k;
  std::string detail;
};

struct SchemaResult {
  std::string name;
  bool ok = true;
  /// Every clause proved without sampling.
  bool symbolic = true;
  std::vector<ClauseResult> clauses;

  const ClauseResult* first_failure() const {
    for (const auto& c : clauses)
      if (c.verdict == Verdict::refuted) return &c;
    return nullptr;
  }
};

namespace detail {

inline void record(SchemaResult& r, ClauseResult c) {
  if (c.verdict == Verdict::refuted) r.ok = false;
  if (c.verdict != Verdict::proved) r.symbolic = false;
  r.clauses.push_back(std::move(c));
}

inline ClauseResult clause(std::string name, std::size_t seg, const Decision& d, std::string detail = {}) {
  return ClauseResult{std::move(name), seg, d.verdict, d.t, d.k, d.ok() ? std::string{} : std::move(detail)};
}

/// Sampled check of pred(t, k) over the sampling grid of a domain.
template <class Pred>
Decision sample_predicate(const Rational& t0, const Poly& kmax, Pred pred, const SamplingLimits& lim = {}) {
  long evals = 0;
  const Integer start = ceil_of(t0);
  for (Integer t = start; t <= start + lim.t_span && evals < lim.max_evaluations; ++t) {
    const Rational tr(t);
    const Integer top = floor_of(kmax(tr));
    for (Integer k = 0; k <= top && evals < lim.max_evaluations; ++k, ++evals)
      if (!pred(tr, Rational(k))) return Decision::refuted_at(tr, Rational(k));
  }
  return Decision{Verdict::sampled, {}, {}};
}

}  // namespace detail

/// Checks, in order: the escape bound's shape, step counts, endpoint
/// matching, step sizes, membership and the escape bound along each segment.
inline SchemaResult verify_chain_schema(const ChainSchema& schema, const ParametricSpace& space) {
  SchemaResult r;
  r.name = schema.name;
  if (schema.segments.empty()) throw InputError("schema '" + schema.name + "' has no segments");
  if (!(schema.scale > 0)) throw InputError("schema '" + schema.name + "' needs a positive scale");
  for (const auto& seg : schema.segments)
    if (seg.formula.size() != space.dim) throw InputError("schema '" + schema.name + "' has the wrong dimension");

  const Poly& g = schema.escape_bound;
  if (g.degree() < 1 || g.leading() <= 0) {
    detail::record(r, ClauseResult{"escape_bound", 0, Verdict::refuted, {}, {},
                                   "escape bound needs degree >= 1 and a positive leading coefficient"});
  } else {
    detail::record(r, detail::clause("escape_bound", 0, nonneg_on_integers(g, schema.t0), "escape bound is negative"));
  }

  const auto xi = constant_coords(space.basepoint);
  const Rational R2 = schema.scale * schema.scale;
  for (std::size_t j = 0; j < schema.segments.size(); ++j) {
    const auto& seg = schema.segments[j];
    const Poly& m = seg.steps;
    if (!integer_valued(Poly2(m))) {
      detail::record(r, ClauseResult{"steps", j, Verdict::refuted, {}, {}, "step count is not integer-valued"});
      continue;
    }
    detail::record(r, detail::clause("steps", j, nonneg_on_integers(m, schema.t0), "negative step count"));

    if (j + 1 < schema.segments.size()) {
      const auto& next = schema.segments[j + 1];
      for (std::size_t i = 0; i < space.dim; ++i) {
        const Poly gap = seg.formula[i].at_k(m) - next.formula[i].at_k(Poly());
        if (gap.is_zero()) continue;
        Rational t = Rational(ceil_of(schema.t0));
        while (gap(t) == 0) t += 1;
        detail::record(r, ClauseResult{"endpoints", j, Verdict::refuted, t, {}, "segment end differs from next start"});
        break;
      }
    }

    // Consecutive displacements, k = 0..m-1.
    const Poly last_step = m - Poly::constant(1);
    std::vector<Poly2> disp;
    for (const auto& f : seg.formula) disp.push_back(f.shifted() - f);
    if (space.norm == Norm::euclidean) {
      Poly2 sq;
      for (const auto& dd : disp) sq = sq + dd * dd;
      detail::record(r, detail::clause("step_bound", j,
                                       nonneg_on_domain(Poly2(Poly::constant(R2)) - sq, schema.t0, last_step),
                                       "step longer than the scale"));
    } else {
      Decision all;
      for (const auto& dd : disp) all = combine(all, nonneg_on_domain(Poly2(Poly::constant(R2)) - dd * dd, schema.t0, last_step));
      detail::record(r, detail::clause("step_bound", j, all, "step longer than the scale"));
    }

    const Membership mem = on_space(FormulaDomain{seg.formula, schema.t0, m}, space);
    detail::record(r, ClauseResult{"membership", j, mem.holds ? mem.verdict : Verdict::refuted, mem.t, mem.k,
                                   mem.holds ? std::string{} : mem.reason});

    std::vector<Poly2> off;
    for (std::size_t i = 0; i < space.dim; ++i) off.push_back(seg.formula[i] - Poly2(xi[i]));
    const Poly2 g2 = Poly2(g * g);
    if (space.norm == Norm::euclidean) {
      Poly2 sq;
      for (const auto& o : off) sq = sq + o * o;
      detail::record(r, detail::clause("escape", j, nonneg_on_domain(sq - g2, schema.t0, m), "chain enters the ball"));
    } else {
      std::optional<Decision> proved;
      for (const auto& o : off) {
        Decision d = nonneg_on_domain(o * o - g2, schema.t0, m);
        if (d.verdict == Verdict::proved) proved = d;
      }
      if (!proved) {
        proved = detail::sample_predicate(schema.t0, m, [&](const Rational& t, const Rational& k) {
          Rational best = 0;
          for (const auto& o : off) best = std::max(best, Rational(abs(o(t, k))));
          return best >= g(t);
        });
      }
      detail::record(r, detail::clause("escape", j, *proved, "chain enters the ball"));
    }
  }
  return r;
}

/// Chain points of a schema at a concrete parameter t.
inline std::vector<std::vector<Rational>> evaluate_chain(const ChainSchema& schema, const Rational& t) {
  std::vector<std::vector<Rational>> pts;
  for (std::size_t j = 0; j < schema.segments.size(); ++j) {
    const auto& seg = schema.segments[j];
    const Integer m = floor_of(seg.steps(t));
    for (Integer k = (j == 0 ? 0 : 1); k <= m; ++k) {
      std::vector<Rational> p;
      for (const auto& f : seg.formula) p.push_back(f(t, Rational(k)));
      pts.push_back(std::move(p));
    }
  }
  return pts;
}

// ---------------------------------------------------------------- gap certificates

struct GapCertificate {
  std::string name;
  Rational scale = 1;
  std::vector<std::string> first;
  std::vector<std::string> second;
  Poly threshold;  // m0 as a polynomial in R
  bool sampled_fallback = false;
};

struct GapResult {
  std::string name;
  /// Min cross distance outside the threshold ball exceeds the scale.
  bool holds = false;
  /// Every cross pair of rays leaves in different directions, so the gap
  /// grows without bound and the separation survives every scale.
  bool diverging = false;
  bool sampled = false;
  double threshold_radius = 0.0;
  double min_distance = kInfinity;
  std::vector<std::string> uncovered;
  std::string failure;

  bool separates() const { return holds && diverging; }
};

namespace detail {

using LVec = std::vector<long double>;

struct AffinePiece {
  LVec origin, dir;
  long double lo = 0, hi = 0;  // hi may be +inf
};

inline AffinePiece to_affine(const Piece& p) {
  AffinePiece a;
  for (const auto& c : p.coords) {
    a.origin.push_back(c.coeff(0).convert_to<long double>());
    a.dir.push_back(c.coeff(1).convert_to<long double>());
  }
  a.lo = p.from.convert_to<long double>();
  a.hi = p.kind == PieceKind::ray ? std::numeric_limits<long double>::infinity() : p.to.convert_to<long double>();
  return a;
}

inline long double dot(const LVec& a, const LVec& b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Parameter intervals of an affine piece lying outside the open ball B(c, m).
inline std::vector<std::pair<long double, long double>> outside_ball(const AffinePiece& a, const LVec& c,
                                                                     long double m) {
  LVec w(a.origin.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = a.origin[i] - c[i];
  const long double alpha = dot(a.dir, a.dir), beta = 2 * dot(w, a.dir), gamma = dot(w, w) - m * m;
  if (alpha == 0) return gamma >= 0 ? std::vector<std::pair<long double, long double>>{{a.lo, a.hi}}
                                    : std::vector<std::pair<long double, long double>>{};
  const long double disc = beta * beta - 4 * alpha * gamma;
  if (disc <= 0) return {{a.lo, a.hi}};
  const long double sq = std::sqrt(disc);
  const long double s1 = (-beta - sq) / (2 * alpha), s2 = (-beta + sq) / (2 * alpha);
  std::vector<std::pair<long double, long double>> out;
  if (a.lo <= std::min(a.hi, s1)) out.emplace_back(a.lo, std::min(a.hi, s1));
  if (std::max(a.lo, s2) <= a.hi) out.emplace_back(std::max(a.lo, s2), a.hi);
  return out;
}

inline long double clamp_to(long double x, long double lo, long double hi) { return std::min(std::max(x, lo), hi); }

/// min |p(s) - q(u)|^2 over a box, p and q affine: interior critical point
/// plus the four edges, each an exact one-dimensional minimization.
inline long double min_squared_distance(const AffinePiece& p, std::pair<long double, long double> I,
                                        const AffinePiece& q, std::pair<long double, long double> J) {
  LVec c(p.origin.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = p.origin[i] - q.origin[i];
  const long double vv = dot(p.dir, p.dir), ww = dot(q.dir, q.dir), vw = dot(p.dir, q.dir);
  const long double cv = dot(c, p.dir), cw = dot(c, q.dir);
  auto D = [&](long double s, long double u) {
    long double acc = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const long double d = c[i] + s * p.dir[i] - u * q.dir[i];
      acc += d * d;
    }
    return acc;
  };
  auto best_u = [&](long double s) {  // minimize over u in J with s fixed
    if (ww == 0) return J.first;
    return clamp_to((cw + s * vw) / ww, J.first, J.second);
  };
  auto best_s = [&](long double u) {
    if (vv == 0) return I.first;
    return clamp_to((u * vw - cv) / vv, I.first, I.second);
  };
  long double best = std::numeric_limits<long double>::infinity();
  const long double det = vv * ww - vw * vw;
  if (det > 1e-18L * vv * ww) {
    const long double s = (vw * cw - ww * cv) / det;
    const long double u = (vv * cw - vw * cv) / det;
    if (s >= I.first && s <= I.second && u >= J.first && u <= J.second) best = D(s, u);
  }
  for (long double s : {I.first, I.second})
    if (std::isfinite(s)) best = std::min(best, D(s, best_u(s)));
  for (long double u : {J.first, J.second})
    if (std::isfinite(u)) best = std::min(best, D(best_s(u), u));
  return best;
}

inline std::vector<LVec> sample_piece(const Piece& p, const LVec& c, long double m, const ParametricSpace& space) {
  std::vector<LVec> out;
  const long double lo = p.from.convert_to<long double>();
  const long double hi = p.kind == PieceKind::ray ? lo + 100 + 10 * m : p.to.convert_to<long double>();
  const int n = 2000;
  for (int i = 0; i <= n; ++i) {
    const long double s = lo + (hi - lo) * i / n;
    LVec x;
    for (const auto& f : p.coords) x.push_back(static_cast<long double>(f.eval(static_cast<double>(s))));
    long double d = 0;
    for (std::size_t j = 0; j < x.size(); ++j)
      d = space.norm == Norm::euclidean ? d + (x[j] - c[j]) * (x[j] - c[j]) : std::max(d, std::abs(x[j] - c[j]));
    if ((space.norm == Norm::euclidean ? std::sqrt(d) : d) >= m) out.push_back(std::move(x));
  }
  return out;
}

inline long double norm_distance(const LVec& a, const LVec& b, Norm n) {
  long double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    d = n == Norm::euclidean ? d + (a[i] - b[i]) * (a[i] - b[i]) : std::max(d, std::abs(a[i] - b[i]));
  return n == Norm::euclidean ? std::sqrt(d) : d;
}

/// Directions not positively parallel, compared exactly.
inline bool directions_diverge(const Piece& a, const Piece& b) {
  Rational vw = 0, vv = 0, ww = 0;
  for (std::size_t i = 0; i < a.coords.size(); ++i) {
    const Rational v = a.coords[i].coeff(1), w = b.coords[i].coeff(1);
    vw += v * w;
    vv += v * v;
    ww += w * w;
  }
  if (vv == 0 || ww == 0) return false;
  return vw <= 0 || vw * vw < vv * ww;
}

}  // namespace detail

/// Verifies the gap at the certificate's scale with m = m0(R): pieces in
/// neither set must sit inside B(xi, m), and the cross distance outside the
/// ball must exceed R. Affine pieces in a Euclidean space are handled in
/// closed form; anything else needs the declared sampling fallback.
inline GapResult verify_gap_certificate(const GapCertificate& cert, const ParametricSpace& space) {
  GapResult out;
  out.name = cert.name;
  std::vector<std::size_t> A, B;
  for (const auto& n : cert.first) A.push_back(space.piece_index(n));
  for (const auto& n : cert.second) B.push_back(space.piece_index(n));
  if (A.empty() || B.empty()) throw InputError("gap certificate '" + cert.name + "' needs two nonempty sides");
  for (std::size_t a : A)
    if (std::find(B.begin(), B.end(), a) != B.end())
      throw InputError("gap certificate '" + cert.name + "' has overlapping sides");
  if (!(cert.scale > 0)) throw InputError("gap certificate '" + cert.name + "' needs a positive scale");

  const Rational m_exact = cert.threshold(cert.scale);
  const long double m = m_exact.convert_to<long double>();
  out.threshold_radius = static_cast<double>(m);
  const detail::LVec c = [&] {
    detail::LVec v;
    for (const auto& x : space.basepoint) v.push_back(x.convert_to<long double>());
    return v;
  }();

  bool closed_form = space.norm == Norm::euclidean;
  for (std::size_t i : A) closed_form = closed_form && space.pieces[i].kind != PieceKind::ambient && space.pieces[i].affine();
  for (std::size_t i : B) closed_form = closed_form && space.pieces[i].kind != PieceKind::ambient && space.pieces[i].affine();
  if (!closed_form && !cert.sampled_fallback)
    throw InputError("gap certificate '" + cert.name +
                     "' needs a sampling fallback (closed form covers affine rays and segments in Euclidean spaces)");
  out.sampled = !closed_form;

  for (std::size_t i = 0; i < space.pieces.size(); ++i) {
    if (std::find(A.begin(), A.end(), i) != A.end() || std::find(B.begin(), B.end(), i) != B.end()) continue;
    const auto& p = space.pieces[i];
    bool inside = false;
    if (p.kind == PieceKind::segment) {
      inside = true;
      for (const auto& s : {p.from, p.to}) {
        std::vector<Rational> x;
        for (const auto& f : p.coords) x.push_back(f(s));
        Rational d = 0;
        for (std::size_t j = 0; j < x.size(); ++j) {
          const Rational o = abs(x[j] - space.basepoint[j]);
          d = space.norm == Norm::euclidean ? d + o * o : std::max(d, o);
        }
        inside = inside && (space.norm == Norm::euclidean ? d < m_exact * m_exact : d < m_exact);
      }
    }
    if (!inside) out.uncovered.push_back(p.name);
  }

  long double best = std::numeric_limits<long double>::infinity();
  for (std::size_t a : A) {
    for (std::size_t b : B) {
      if (closed_form) {
        const auto pa = detail::to_affine(space.pieces[a]);
        const auto pb = detail::to_affine(space.pieces[b]);
        for (const auto& I : detail::outside_ball(pa, c, m))
          for (const auto& J : detail::outside_ball(pb, c, m))
            best = std::min(best, detail::min_squared_distance(pa, I, pb, J));
      } else {
        const auto sa = detail::sample_piece(space.pieces[a], c, m, space);
        const auto sb = detail::sample_piece(space.pieces[b], c, m, space);
        for (const auto& x : sa)
          for (const auto& y : sb) {
            const long double d = detail::norm_distance(x, y, space.norm);
            best = std::min(best, d * d);
          }
      }
    }
  }
  out.min_distance = static_cast<double>(std::sqrt(best));
  const double R = cert.scale.convert_to<double>();
  out.holds = out.uncovered.empty() && out.min_distance > R * (1.0 + kRelTol);

  out.diverging = true;
  for (std::size_t a : A)
    for (std::size_t b : B) {
      const auto& pa = space.pieces[a];
      const auto& pb = space.pieces[b];
      if (pa.kind == PieceKind::segment || pb.kind == PieceKind::segment) continue;
      const bool ok = pa.kind == PieceKind::ray && pb.kind == PieceKind::ray && pa.affine() && pb.affine() &&
                      detail::directions_diverge(pa, pb);
      out.diverging = out.diverging && ok;
    }

  if (!out.uncovered.empty()) out.failure = "pieces outside both sides reach beyond the threshold ball";
  else if (!out.holds) out.failure = "cross distance outside the threshold ball does not exceed the scale";
  else if (!out.diverging) out.failure = "sides do not diverge, separation is only certified at this scale";
  return out;
}

// ---------------------------------------------------------------- classification

struct Representative {
  std::string name;
  SymbolicPoint point;
};

struct Certificates {
  std::vector<Representative> representatives;
  std::vector<ChainSchema> schemas;
  std::vector<GapCertificate> gaps;
};

enum class PairStatus { connected, separated, unknown };

inline std::string_view to_string(PairStatus s) {
  switch (s) {
    case PairStatus::connected: return "connected";
    case PairStatus::separated: return "separated";
    case PairStatus::unknown: return "unknown";
  }
  return "?";
}

/// Certificates claiming both connection and separation of one pair.
class InconsistentCertificates : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PairEntry {
  std::string first, second;
  PairStatus status = PairStatus::unknown;
  std::string evidence;
};

struct IotaReport {
  std::string space;
  std::vector<std::string> representatives;
  std::vector<PairEntry> pairs;
  /// Representatives grouped by verified connection.
  std::vector<std::vector<std::string>> classes;
  /// No pair is unknown, so the classes are the end classes.
  bool exact = false;
  std::vector<SchemaResult> schemas;
  std::vector<GapResult> gaps;
};

/// Pairs of representatives are connected through verified schemas (and
/// finite closeness), separated by verified diverging gaps, unknown otherwise.
/// Takes the verification results for certs.schemas and certs.gaps in order.
inline IotaReport classify(const ParametricSpace& space, const Certificates& certs,
                           std::vector<SchemaResult> schema_results, std::vector<GapResult> gap_results) {
  validate(space);
  if (schema_results.size() != certs.schemas.size() || gap_results.size() != certs.gaps.size())
    throw InputError("verification results do not match the certificates");
  IotaReport rep;
  rep.space = space.name;
  const auto& reps = certs.representatives;
  if (reps.empty()) throw InputError("no representatives declared");
  for (const auto& r : reps) {
    if (!is_infinite(r.point, space)) throw InputError("representative '" + r.name + "' is not infinite");
    rep.representatives.push_back(r.name);
  }

  const std::size_t n = reps.size();
  DisjointSets sets(n);
  std::vector<std::vector<std::string>> link_evidence(n * n);
  auto note = [&](std::size_t a, std::size_t b, const std::string& why) {
    link_evidence[std::min(a, b) * n + std::max(a, b)].push_back(why);
  };
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (finitely_close(reps[a].point, reps[b].point)) {
        sets.unite(a, b);
        note(a, b, "finitely close");
      }

  rep.schemas = std::move(schema_results);
  rep.gaps = std::move(gap_results);
  for (std::size_t si = 0; si < certs.schemas.size(); ++si) {
    const auto& schema = certs.schemas[si];
    if (!rep.schemas[si].ok) continue;
    const SymbolicPoint s = schema.start(), e = schema.end();
    std::vector<std::size_t> at_start, at_end;
    for (std::size_t i = 0; i < n; ++i) {
      if (finitely_close(reps[i].point, s)) at_start.push_back(i);
      if (finitely_close(reps[i].point, e)) at_end.push_back(i);
    }
    for (std::size_t a : at_start)
      for (std::size_t b : at_end)
        if (a != b) {
          sets.unite(a, b);
          note(a, b, "schema " + schema.name);
        }
  }

  std::vector<std::vector<std::string>> holding(n);
  for (std::size_t i = 0; i < n; ++i) holding[i] = pieces_holding(reps[i].point, space);
  auto on_side = [&](std::size_t i, const std::vector<std::string>& side) {
    for (const auto& p : holding[i])
      if (std::find(side.begin(), side.end(), p) != side.end()) return true;
    return false;
  };
  std::map<std::pair<std::size_t, std::size_t>, std::string> split;  // class roots
  for (std::size_t gi = 0; gi < certs.gaps.size(); ++gi) {
    const auto& gap = certs.gaps[gi];
    if (!rep.gaps[gi].separates()) continue;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (on_side(a, gap.first) && on_side(b, gap.second)) {
          const std::size_t ra = sets.find(a), rb = sets.find(b);
          if (ra == rb)
            throw InconsistentCertificates("'" + reps[a].name + "' and '" + reps[b].name +
                                           "' are both connected and separated by gap " + gap.name);
          split.emplace(std::minmax(ra, rb), "gap " + gap.name);
        }
  }

  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      PairEntry e{reps[a].name, reps[b].name, PairStatus::unknown, {}};
      const std::size_t ra = sets.find(a), rb = sets.find(b);
      if (ra == rb) {
        e.status = PairStatus::connected;
        const auto& ev = link_evidence[a * n + b];
        std::string joined;
        for (const auto& why : ev) joined += (joined.empty() ? "" : "; ") + why;
        e.evidence = ev.empty() ? "transitive" : joined;
      } else if (auto it = split.find(std::minmax(ra, rb)); it != split.end()) {
        e.status = PairStatus::separated;
        e.evidence = it->second;
      }
      rep.pairs.push_back(std::move(e));
    }

  std::map<std::size_t, std::vector<std::string>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[sets.find(i)].push_back(reps[i].name);
  for (auto& [root, names] : groups) rep.classes.push_back(std::move(names));
  rep.exact = std::none_of(rep.pairs.begin(), rep.pairs.end(),
                           [](const PairEntry& e) { return e.status == PairStatus::unknown; });
  return rep;
}

inline IotaReport iota_report(const ParametricSpace& space, const Certificates& certs) {
  validate(space);
  std::vector<SchemaResult> schemas;
  for (const auto& s : certs.schemas) schemas.push_back(verify_chain_schema(s, space));
  std::vector<GapResult> gaps;
  for (const auto& g : certs.gaps) gaps.push_back(verify_gap_certificate(g, space));
  return classify(space, certs, std::move(schemas), std::move(gaps));
}

// ---------------------------------------------------------------- transport

/// x -> A x + b with A^T A = c^2 I: a similarity scaling distances by c.
class Similarity {
 public:
  Similarity(std::vector<std::vector<Rational>> matrix, std::vector<Rational> offset)
      : a_(std::move(matrix)), b_(std::move(offset)) {
    const std::size_t n = a_.size();
    if (n == 0 || b_.size() != n) throw InputError("similarity has mismatched dimensions");
    for (const auto& row : a_)
      if (row.size() != n) throw InputError("similarity matrix is not square");
    Rational c2 = -1;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        Rational s = 0;
        for (std::size_t k = 0; k < n; ++k) s += a_[k][i] * a_[k][j];
        if (i == j && c2 < 0) c2 = s;
        if ((i == j && s != c2) || (i != j && s != 0)) throw InputError("matrix is not a scaled orthogonal matrix");
      }
    if (c2 <= 0) throw InputError("similarity is degenerate");
    const Integer num = sqrt(numerator(c2)), den = sqrt(denominator(c2));
    if (num * num != numerator(c2) || den * den != denominator(c2))
      throw InputError("similarity factor is irrational");
    factor_ = Rational(num, den);
  }

  const Rational& factor() const { return factor_; }
  std::size_t dim() const { return a_.size(); }

  template <class P>
  std::vector<P> apply(const std::vector<P>& x) const {
    std::vector<P> out;
    for (std::size_t i = 0; i < a_.size(); ++i) {
      P acc = P(Poly::constant(b_[i]));
      for (std::size_t j = 0; j < a_.size(); ++j) acc = acc + P(Poly::constant(a_[i][j])) * x[j];
      out.push_back(std::move(acc));
    }
    return out;
  }
  std::vector<Rational> apply_point(const std::vector<Rational>& x) const {
    std::vector<Rational> out(b_);
    for (std::size_t i = 0; i < a_.size(); ++i)
      for (std::size_t j = 0; j < a_.size(); ++j) out[i] += a_[i][j] * x[j];
    return out;
  }
  /// Linear part only, for direction vectors.
  std::vector<Poly> apply_linear(const std::vector<Poly>& x) const {
    std::vector<Poly> out;
    for (std::size_t i = 0; i < a_.size(); ++i) {
      Poly acc;
      for (std::size_t j = 0; j < a_.size(); ++j) acc = acc + a_[i][j] * x[j];
      out.push_back(std::move(acc));
    }
    return out;
  }

 private:
  std::vector<std::vector<Rational>> a_;
  std::vector<Rational> b_;
  Rational factor_;
};

inline ParametricSpace transport(const ParametricSpace& space, const Similarity& f) {
  if (f.dim() != space.dim) throw InputError("similarity dimension mismatch");
  if (space.norm != Norm::euclidean) throw InputError("similarities preserve only the Euclidean norm");
  ParametricSpace out = space;
  out.name = space.name + "'";
  out.basepoint = f.apply_point(space.basepoint);
  for (auto& p : out.pieces) {
    if (p.kind == PieceKind::ambient) {
      if (p.lattice) throw InputError("lattice pieces do not transport");
      continue;
    }
    p.coords = f.apply(p.coords);
  }
  return out;
}

/// Image schema at scale c R with escape bound c g.
inline ChainSchema transport(const ChainSchema& schema, const Similarity& f) {
  ChainSchema out = schema;
  out.name = schema.name + "'";
  out.scale = f.factor() * schema.scale;
  out.escape_bound = f.factor() * schema.escape_bound;
  for (auto& seg : out.segments) seg.formula = f.apply(seg.formula);
  return out;
}

}  // namespace coarse::hyper
