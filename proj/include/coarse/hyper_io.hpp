#pragma once
// JSON descriptors for parametric spaces and certificates, and JSON forms of
// the verification reports. Rationals travel as strings such as "3/2".

#include <json.hpp>

#include "coarse/hyper.hpp"

namespace coarse::hyper {

using nlohmann::json;

namespace detail {

inline Rational rational_from(const json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long long>());
  throw InputError("expected a rational string, got " + j.dump());
}

inline const json& need(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
  return j.at(key);
}

inline json opt_rational(const std::optional<Rational>& r) { return r ? json(to_string(*r)) : json(nullptr); }

inline std::optional<Rational> opt_rational_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return rational_from(j);
}

inline json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }
inline double finite_or_inf(const json& j) { return j.is_null() ? kInfinity : j.get<double>(); }

}  // namespace detail

inline json poly_to_json(const Poly& p) {
  json a = json::array();
  for (const auto& c : p.coeffs()) a.push_back(to_string(c));
  return a;
}

inline Poly poly_from_json(const json& j) {
  if (!j.is_array()) return Poly::constant(detail::rational_from(j));
  std::vector<Rational> c;
  for (const auto& x : j) c.push_back(detail::rational_from(x));
  return Poly(std::move(c));
}

/// A bivariate polynomial is a list of t-polynomials by power of k.
inline json poly2_to_json(const Poly2& p) {
  json a = json::array();
  for (int i = 0; i <= p.k_degree(); ++i) a.push_back(poly_to_json(p.coeff_k(static_cast<std::size_t>(i))));
  return a;
}

inline Poly2 poly2_from_json(const json& j) {
  if (!j.is_array()) return Poly2(Poly::constant(detail::rational_from(j)));
  std::vector<Poly> c;
  for (const auto& x : j) c.push_back(poly_from_json(x));
  return Poly2(std::move(c));
}

inline json space_to_json(const ParametricSpace& s) {
  json j;
  j["name"] = s.name;
  j["dimension"] = s.dim;
  j["norm"] = std::string(to_string(s.norm));
  j["basepoint"] = json::array();
  for (const auto& x : s.basepoint) j["basepoint"].push_back(to_string(x));
  j["pieces"] = json::array();
  for (const auto& p : s.pieces) {
    json q;
    q["name"] = p.name;
    q["kind"] = std::string(to_string(p.kind));
    if (p.kind == PieceKind::ambient) {
      q["lattice"] = p.lattice;
    } else {
      q["coords"] = json::array();
      for (const auto& c : p.coords) q["coords"].push_back(poly_to_json(c));
      q["from"] = to_string(p.from);
      if (p.kind == PieceKind::segment) q["to"] = to_string(p.to);
    }
    j["pieces"].push_back(std::move(q));
  }
  return j;
}

inline ParametricSpace space_from_json(const json& j) {
  using detail::need;
  ParametricSpace s;
  s.name = j.value("name", std::string("space"));
  s.dim = need(j, "dimension").get<std::size_t>();
  s.norm = parse_norm(j.value("norm", std::string("euclidean")));
  for (const auto& x : need(j, "basepoint")) s.basepoint.push_back(detail::rational_from(x));
  for (const auto& q : need(j, "pieces")) {
    Piece p;
    p.name = need(q, "name").get<std::string>();
    const std::string kind = need(q, "kind").get<std::string>();
    if (kind == "ambient") {
      p.kind = PieceKind::ambient;
      p.lattice = q.value("lattice", false);
    } else if (kind == "ray" || kind == "segment") {
      p.kind = kind == "ray" ? PieceKind::ray : PieceKind::segment;
      for (const auto& c : need(q, "coords")) p.coords.push_back(poly_from_json(c));
      p.from = detail::rational_from(need(q, "from"));
      if (p.kind == PieceKind::segment) p.to = detail::rational_from(need(q, "to"));
    } else {
      throw InputError("unknown piece kind '" + kind + "'");
    }
    s.pieces.push_back(std::move(p));
  }
  validate(s);
  return s;
}

inline json certificates_to_json(const Certificates& c) {
  json j;
  j["representatives"] = json::array();
  for (const auto& r : c.representatives) {
    json q{{"name", r.name}, {"t0", to_string(r.point.t0)}, {"coords", json::array()}};
    for (const auto& x : r.point.coords) q["coords"].push_back(poly_to_json(x));
    j["representatives"].push_back(std::move(q));
  }
  j["schemas"] = json::array();
  for (const auto& s : c.schemas) {
    json q{{"name", s.name},
           {"scale", to_string(s.scale)},
           {"t0", to_string(s.t0)},
           {"escape_bound", poly_to_json(s.escape_bound)},
           {"segments", json::array()}};
    for (const auto& seg : s.segments) {
      json f = json::array();
      for (const auto& x : seg.formula) f.push_back(poly2_to_json(x));
      q["segments"].push_back({{"formula", f}, {"steps", poly_to_json(seg.steps)}});
    }
    j["schemas"].push_back(std::move(q));
  }
  j["gaps"] = json::array();
  for (const auto& g : c.gaps)
    j["gaps"].push_back({{"name", g.name},
                         {"scale", to_string(g.scale)},
                         {"first", g.first},
                         {"second", g.second},
                         {"threshold", poly_to_json(g.threshold)},
                         {"sampled_fallback", g.sampled_fallback}});
  return j;
}

inline Certificates certificates_from_json(const json& j) {
  using detail::need;
  Certificates c;
  for (const auto& q : j.value("representatives", json::array())) {
    Representative r;
    r.name = need(q, "name").get<std::string>();
    r.point.t0 = q.contains("t0") ? detail::rational_from(q.at("t0")) : Rational(1);
    for (const auto& x : need(q, "coords")) r.point.coords.push_back(poly_from_json(x));
    c.representatives.push_back(std::move(r));
  }
  for (const auto& q : j.value("schemas", json::array())) {
    ChainSchema s;
    s.name = need(q, "name").get<std::string>();
    s.scale = detail::rational_from(need(q, "scale"));
    s.t0 = q.contains("t0") ? detail::rational_from(q.at("t0")) : Rational(1);
    s.escape_bound = poly_from_json(need(q, "escape_bound"));
    for (const auto& seg : need(q, "segments")) {
      SchemaSegment ss;
      for (const auto& x : need(seg, "formula")) ss.formula.push_back(poly2_from_json(x));
      ss.steps = poly_from_json(need(seg, "steps"));
      s.segments.push_back(std::move(ss));
    }
    c.schemas.push_back(std::move(s));
  }
  for (const auto& q : j.value("gaps", json::array())) {
    GapCertificate g;
    g.name = need(q, "name").get<std::string>();
    g.scale = detail::rational_from(need(q, "scale"));
    g.first = need(q, "first").get<std::vector<std::string>>();
    g.second = need(q, "second").get<std::vector<std::string>>();
    g.threshold = poly_from_json(need(q, "threshold"));
    g.sampled_fallback = q.value("sampled_fallback", false);
    c.gaps.push_back(std::move(g));
  }
  return c;
}

inline json to_json(const SchemaResult& r) {
  json j{{"name", r.name}, {"ok", r.ok}, {"symbolic", r.symbolic}, {"clauses", json::array()}};
  for (const auto& c : r.clauses)
    j["clauses"].push_back({{"clause", c.clause},
                            {"segment", c.segment},
                            {"status", std::string(to_string(c.verdict))},
                            {"t", detail::opt_rational(c.t)},
                            {"k", detail::opt_rational(c.k)},
                            {"detail", c.detail}});
  return j;
}

inline Verdict parse_verdict(const std::string& s) {
  if (s == "proved") return Verdict::proved;
  if (s == "sampled") return Verdict::sampled;
  if (s == "refuted") return Verdict::refuted;
  throw InputError("unknown verdict '" + s + "'");
}

inline SchemaResult schema_result_from_json(const json& j) {
  SchemaResult r;
  r.name = j.at("name").get<std::string>();
  r.ok = j.at("ok").get<bool>();
  r.symbolic = j.at("symbolic").get<bool>();
  for (const auto& c : j.at("clauses"))
    r.clauses.push_back(ClauseResult{c.at("clause").get<std::string>(), c.at("segment").get<std::size_t>(),
                                     parse_verdict(c.at("status").get<std::string>()),
                                     detail::opt_rational_from(c.at("t")), detail::opt_rational_from(c.at("k")),
                                     c.at("detail").get<std::string>()});
  return r;
}

inline json to_json(const GapResult& g) {
  return {{"name", g.name},
          {"holds", g.holds},
          {"diverging", g.diverging},
          {"sampled", g.sampled},
          {"threshold_radius", g.threshold_radius},
          {"min_distance", detail::finite_or_null(g.min_distance)},
          {"uncovered", g.uncovered},
          {"failure", g.failure}};
}

inline GapResult gap_result_from_json(const json& j) {
  GapResult g;
  g.name = j.at("name").get<std::string>();
  g.holds = j.at("holds").get<bool>();
  g.diverging = j.at("diverging").get<bool>();
  g.sampled = j.at("sampled").get<bool>();
  g.threshold_radius = j.at("threshold_radius").get<double>();
  g.min_distance = detail::finite_or_inf(j.at("min_distance"));
  g.uncovered = j.at("uncovered").get<std::vector<std::string>>();
  g.failure = j.at("failure").get<std::string>();
  return g;
}

inline PairStatus parse_pair_status(const std::string& s) {
  if (s == "connected") return PairStatus::connected;
  if (s == "separated") return PairStatus::separated;
  if (s == "unknown") return PairStatus::unknown;
  throw InputError("unknown pair status '" + s + "'");
}

inline json to_json(const IotaReport& r) {
  json j{{"space", r.space},
         {"representatives", r.representatives},
         {"classes", r.classes},
         {"class_count", r.classes.size()},
         {"exact", r.exact},
         {"pairs", json::array()},
         {"schemas", json::array()},
         {"gaps", json::array()}};
  for (const auto& p : r.pairs)
    j["pairs"].push_back({{"first", p.first},
                          {"second", p.second},
                          {"status", std::string(to_string(p.status))},
                          {"evidence", p.evidence}});
  for (const auto& s : r.schemas) j["schemas"].push_back(to_json(s));
  for (const auto& g : r.gaps) j["gaps"].push_back(to_json(g));
  return j;
}

inline IotaReport iota_report_from_json(const json& j) {
  IotaReport r;
  r.space = j.at("space").get<std::string>();
  r.representatives = j.at("representatives").get<std::vector<std::string>>();
  r.classes = j.at("classes").get<std::vector<std::vector<std::string>>>();
  r.exact = j.at("exact").get<bool>();
  for (const auto& p : j.at("pairs"))
    r.pairs.push_back(PairEntry{p.at("first").get<std::string>(), p.at("second").get<std::string>(),
                                parse_pair_status(p.at("status").get<std::string>()),
                                p.at("evidence").get<std::string>()});
  for (const auto& s : j.at("schemas")) r.schemas.push_back(schema_result_from_json(s));
  for (const auto& g : j.at("gaps")) r.gaps.push_back(gap_result_from_json(g));
  return r;
}

}  // namespace coarse::hyper
