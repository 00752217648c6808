#pragma once
// JSON forms of the finite-scale reports. Component labels are written as
// point labels of the instance so reports stay readable.

#include <sstream>

#include <json.hpp>

#include "coarse/nonscattering.hpp"
#include "coarse/sigma.hpp"

namespace coarse {

using nlohmann::json;

inline Stability parse_stability(const std::string& s) {
  if (s == "stabilized") return Stability::stabilized;
  if (s == "sparse") return Stability::sparse;
  if (s == "inconclusive") return Stability::inconclusive;
  throw InputError("unknown stability status '" + s + "'");
}

inline json to_json(const StabilityReport& r) {
  return {{"status", std::string(to_string(r.status))},
          {"stable_count", r.stable_count},
          {"window", r.window},
          {"window_r", r.window_r},
          {"window_R", r.window_R},
          {"r_values", r.r_values},
          {"R_values", r.R_values},
          {"counts", r.counts}};
}

inline StabilityReport stability_report_from_json(const json& j) {
  StabilityReport r;
  try {
    r.status = parse_stability(j.at("status").get<std::string>());
    r.stable_count = j.at("stable_count").get<std::size_t>();
    r.window = j.at("window").get<std::size_t>();
    r.window_r = j.at("window_r").get<std::vector<std::size_t>>();
    r.window_R = j.at("window_R").get<std::vector<std::size_t>>();
    r.r_values = j.at("r_values").get<std::vector<double>>();
    r.R_values = j.at("R_values").get<std::vector<double>>();
    r.counts = j.at("counts").get<std::vector<std::vector<std::size_t>>>();
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed stability report: ") + e.what());
  }
  return r;
}

/// "Stabilized(2)", "Sparse", "Inconclusive".
inline std::string summary(const StabilityReport& r) {
  switch (r.status) {
    case Stability::stabilized: return "Stabilized(" + std::to_string(r.stable_count) + ")";
    case Stability::sparse: return "Sparse";
    case Stability::inconclusive: return "Inconclusive";
  }
  return "?";
}

/// Count matrix as CSV: header "r,R=<R1>,...", one row per cut-off.
inline std::string counts_csv(const StabilityReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "r";
  for (double R : r.R_values) out << ",R=" << R;
  out << '\n';
  for (std::size_t i = 0; i < r.r_values.size(); ++i) {
    out << r.r_values[i];
    for (std::size_t c : r.counts[i]) out << ',' << c;
    out << '\n';
  }
  return out.str();
}

inline json instance_summary(const FiniteCoarseInstance& inst) {
  return {{"points", inst.size()},
          {"dropped", inst.dropped()},
          {"metric", std::string(to_string(inst.metric()))},
          {"basepoint", inst.label(inst.basepoint())},
          {"truncation_radius", inst.truncation_radius()}};
}

inline json thread_table(const FiniteCoarseInstance& inst, const EndSystem& sys, std::size_t Ri) {
  json a = json::array();
  for (const auto& t : threads(sys, Ri)) {
    json path = json::array();
    for (PointId c : t.path) path.push_back(inst.label(c));
    a.push_back({{"representative", inst.label(t.representative)}, {"path", path}});
  }
  return a;
}

inline json to_json(const FiniteCoarseInstance& inst, const SigmaReport& s, const OmegaMap& om) {
  json j{{"margin", s.margin}, {"shell_radius", s.shell_radius}, {"class_count", s.classes.size()}};
  j["classes"] = json::array();
  for (PointId c : s.classes) j["classes"].push_back(inst.label(c));
  j["per_scale"] = json::array();
  for (const auto& sc : s.per_scale) {
    json e{{"scale", sc.scale}, {"exists", sc.exists}, {"classes", json::array()}};
    for (PointId c : sc.classes) e["classes"].push_back(inst.label(c));
    if (sc.chain) {
      e["chain_length"] = sc.chain->points.size();
      e["chain_end"] = inst.label(sc.chain->points.back());
    }
    j["per_scale"].push_back(std::move(e));
  }
  json omega{{"scale_index", om.scale_index},
             {"thread_count", om.thread_count},
             {"injective", om.injective},
             {"surjective", om.surjective},
             {"bijective", om.bijective()},
             {"table", json::object()}};
  for (auto [c, t] : om.class_to_thread) omega["table"][inst.label(c)] = t;
  j["omega"] = std::move(omega);
  return j;
}

inline json to_json(const std::optional<NonscatteringWitness>& w) {
  if (!w) return {{"exists", false}};
  return {{"exists", true},
          {"scale_index", w->scale_index},
          {"scale", w->scale},
          {"verified_cutoffs", w->verified_cutoffs}};
}

inline json to_json(const NonscatteringConsequences& c) {
  return {{"stability", to_json(c.stability)},
          {"stabilized_at_most_one", c.stabilized_at_most_one},
          {"sigma_at_most_one", c.sigma_at_most_one},
          {"outer_nonempty", c.outer_nonempty},
          {"omega_bijective", c.omega_bijective},
          {"witness_monotone", c.witness_monotone},
          {"holds", c.holds()}};
}

namespace detail {

inline json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace detail

inline json to_json(const BornologousModulus& m) {
  json mod = json::array();
  for (double x : m.modulus) mod.push_back(detail::finite_or_null(x));
  return {{"scales", m.scales}, {"modulus", mod}, {"bounded", m.bounded}};
}

inline json to_json(const PropernessReport& p) {
  json pre = json::array();
  for (const auto& x : p.preimage_radius) pre.push_back(x ? detail::finite_or_null(*x) : json(nullptr));
  return {{"radii", p.radii}, {"preimage_radius", pre}, {"proper", p.proper}};
}

inline json to_json(const FiniteCoarseInstance& src, const FiniteCoarseInstance& tgt, const InducedEndMap& m) {
  json j{{"defined", m.defined},
         {"failure", m.failure},
         {"modulus", to_json(m.modulus)},
         {"properness", to_json(m.properness)},
         {"cells", json::array()}};
  for (const auto& c : m.cells) {
    json comps = json::object();
    for (auto [a, b] : c.components) comps[src.label(a)] = tgt.label(b);
    j["cells"].push_back({{"source", {c.source.r, c.source.R}}, {"target", {c.target.r, c.target.R}}, {"map", comps}});
  }
  return j;
}

}  // namespace coarse
