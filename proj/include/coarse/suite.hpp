#pragma once
// The acceptance battery: one pass/fail result per criterion, shared by the
// `coarse suite` subcommand and the acceptance test binary.

#include <chrono>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>

#include "coarse/end_maps.hpp"
#include "coarse/hyper_io.hpp"
#include "coarse/nonscattering.hpp"
#include "coarse/oracle.hpp"
#include "coarse/report_json.hpp"
#include "coarse/sigma.hpp"
#include "coarse/spaces.hpp"

namespace coarse::battery {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct SuiteOptions {
  /// Directory holding the shipped descriptor files; built-ins when empty.
  std::filesystem::path data_dir;
  std::size_t jobs = 1;
};

inline std::string certs_file(const std::string& name) {
  return name == "flared_vase" ? "fv_certs.json" : name + "_certs.json";
}

struct Shipped {
  hyper::ParametricSpace space;
  hyper::Certificates certs;
  std::string source;
};

inline Shipped shipped(const std::string& name, const std::filesystem::path& data_dir) {
  if (!data_dir.empty() && std::filesystem::exists(data_dir / (name + ".json"))) {
    return {hyper::space_from_json(load_json(data_dir / (name + ".json"))),
            hyper::certificates_from_json(load_json(data_dir / certs_file(name))), (data_dir / name).string()};
  }
  return {descriptor(name), certificates(name), "built-in"};
}

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline std::string fmt(double x) {
  std::ostringstream o;
  o.precision(3);
  o << x;
  return o.str();
}

inline StabilityReport ends_of(const FiniteCoarseInstance& inst, std::size_t jobs) {
  return stable_end_count(build_end_system(inst, ScaleLadder::default_for(inst.truncation_radius()), jobs));
}

inline std::string page_of(const std::string& label) { return label.substr(0, label.find(':')); }

}  // namespace detail

// ---------------------------------------------------------------- random instances

/// A random cloud or graph of 2..max_points points with a ladder inside its
/// truncation radius.
struct RandomCase {
  InstancePtr instance;
  ScaleLadder ladder;
};

inline RandomCase random_case(std::mt19937_64& rng, std::size_t max_points = 300) {
  std::uniform_int_distribution<std::size_t> size(2, max_points);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = size(rng);
  const bool graph = unit(rng) < 0.4;
  InstancePtr inst;
  if (!graph) {
    CloudTable t;
    t.dim = 1 + rng() % 3;
    const std::size_t arms = 1 + rng() % 4;
    std::vector<std::vector<double>> dirs(arms, std::vector<double>(t.dim));
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& d : dirs)
      for (auto& x : d) x = gauss(rng);
    for (std::size_t i = 0; i < n; ++i) {
      t.ids.push_back("p" + std::to_string(i));
      const auto& d = dirs[rng() % arms];
      const double along = i == 0 ? 0.0 : 20.0 * unit(rng);
      const double noise = i == 0 ? 0.0 : 1.5;
      for (std::size_t k = 0; k < t.dim; ++k) t.coords.push_back(along * d[k] + noise * gauss(rng));
    }
    const MetricKind metric = unit(rng) < 0.7 ? MetricKind::euclidean : MetricKind::chebyshev;
    const auto all = FiniteCoarseInstance::from_cloud(t, metric, "p0", kInfinity);
    double rho = 0.0;
    for (double r : all.radii()) rho = std::max(rho, r);
    if (unit(rng) < 0.3) rho *= 0.5 + 0.5 * unit(rng);
    inst = share(FiniteCoarseInstance::from_cloud(t, metric, "p0", rho));
  } else {
    EdgeTable g;
    for (std::size_t i = 0; i < n; ++i) g.vertices.push_back("v" + std::to_string(i));
    std::uniform_real_distribution<double> weight(0.3, 3.0);
    for (std::size_t i = 1; i < n; ++i) {
      if (unit(rng) < 0.05) continue;  // leaves some vertices unreachable
      g.edges.push_back({"v" + std::to_string(rng() % i), "v" + std::to_string(i), weight(rng)});
    }
    const std::size_t extra = rng() % (n / 4 + 1);
    for (std::size_t e = 0; e < extra; ++e)
      g.edges.push_back({"v" + std::to_string(rng() % n), "v" + std::to_string(rng() % n), weight(rng)});
    const auto all = FiniteCoarseInstance::from_graph(g, "v0", kInfinity);
    double rho = 0.0;
    for (double r : all.radii())
      if (std::isfinite(r)) rho = std::max(rho, r);
    if (unit(rng) < 0.3) rho *= 0.5 + 0.5 * unit(rng);
    if (rho == 0.0) rho = 1.0;
    inst = share(FiniteCoarseInstance::from_graph(g, "v0", rho));
  }
  const double rho = std::max(inst->truncation_radius(), 1e-6);
  std::vector<double> r{0.0};
  const std::size_t nr = 1 + rng() % 4;
  for (std::size_t i = 0; i < nr; ++i) r.push_back(0.9 * rho * unit(rng));
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  std::vector<double> R;
  const std::size_t nR = 1 + rng() % 4;
  for (std::size_t i = 0; i < nR; ++i) R.push_back(0.2 + 6.0 * unit(rng));
  std::sort(R.begin(), R.end());
  R.erase(std::unique(R.begin(), R.end()), R.end());
  return {inst, ScaleLadder::make(std::move(r), std::move(R), rho)};
}

// ---------------------------------------------------------------- criteria

inline CriterionResult line_ends(const SuiteOptions& opt) {
  CriterionResult c{1, "line: two ends", false, {}, 0.0};
  detail::Stopwatch sw;
  SpaceRecipe rc;
  rc.name = "line";
  rc.N = 10000;
  const auto rep = detail::ends_of(generate(rc), opt.jobs);
  const auto sh = shipped("line", opt.data_dir);
  const auto iota = hyper::iota_report(sh.space, sh.certs);
  c.seconds = sw.seconds();
  c.passed = summary(rep) == "Stabilized(2)" && iota.classes.size() == 2 && iota.exact && c.seconds < 1.0;
  c.detail = summary(rep) + ", hyper " + std::to_string(iota.classes.size()) + " classes" +
             (iota.exact ? " (all pairs decided)" : " (undecided pairs)");
  return c;
}

inline CriterionResult plane_ends(const SuiteOptions& opt) {
  CriterionResult c{2, "plane lattice: one end", false, {}, 0.0};
  detail::Stopwatch sw;
  SpaceRecipe rc;
  rc.name = "grid2d";
  rc.N = 100;
  const auto inst = generate(rc);
  const auto rep = detail::ends_of(inst, opt.jobs);
  const auto sh = shipped("grid2d", opt.data_dir);
  bool schema_ok = false;
  for (const auto& s : sh.certs.schemas) {
    if (s.name != "rectangle") continue;
    const auto r = hyper::verify_chain_schema(s, sh.space);
    schema_ok = r.ok && r.symbolic && s.scale == 1;
  }
  c.seconds = sw.seconds();
  c.passed = summary(rep) == "Stabilized(1)" && schema_ok && c.seconds < 10.0;
  c.detail = summary(rep) + " on " + std::to_string(inst.size()) + " points, rectangle schema " +
             (schema_ok ? "verified symbolically at R=1" : "NOT verified");
  return c;
}

inline CriterionResult vases(const SuiteOptions& opt) {
  CriterionResult c{3, "vase one end, flared vase two", false, {}, 0.0};
  detail::Stopwatch sw;
  SpaceRecipe rc;
  rc.N = 1000;
  rc.name = "vase";
  const auto v = detail::ends_of(generate(rc), opt.jobs);
  rc.name = "flared_vase";
  const auto w = detail::ends_of(generate(rc), opt.jobs);
  const auto sv = shipped("vase", opt.data_dir);
  const auto sw_ = shipped("flared_vase", opt.data_dir);
  const auto iv = hyper::iota_report(sv.space, sv.certs);
  const auto iw = hyper::iota_report(sw_.space, sw_.certs);
  c.seconds = sw.seconds();
  c.passed = summary(v) == "Stabilized(1)" && summary(w) == "Stabilized(2)" && iv.exact && iw.exact &&
             iv.classes.size() == 1 && iw.classes.size() == 2;
  c.detail = "vase " + summary(v) + " / hyper " + std::to_string(iv.classes.size()) + ", flared " + summary(w) +
             " / hyper " + std::to_string(iw.classes.size());
  return c;
}

inline CriterionResult squares(const SuiteOptions& opt) {
  CriterionResult c{4, "squares: no escape", false, {}, 0.0};
  detail::Stopwatch sw;
  SpaceRecipe rc;
  rc.name = "squares";
  rc.rho = 1e6;
  const auto inst = generate(rc);
  std::vector<double> scales;
  for (double R = 1; R <= 512; R *= 2) scales.push_back(R);
  scales.push_back(1000);
  std::size_t present = 0;
  for (double R : scales) present += find_escape_chain(inst, R).has_value();
  const auto base_ladder = ScaleLadder::default_for(inst.truncation_radius());
  const auto rep = stable_end_count(build_end_system(inst, base_ladder, opt.jobs));
  const auto wide = build_end_system(inst, ScaleLadder::make(base_ladder.r_values, scales, inst.truncation_radius()),
                                     opt.jobs);
  const auto sig = sigma_report(inst, wide);
  c.seconds = sw.seconds();
  c.passed = present == 0 && sig.classes.empty() && rep.status == Stability::sparse && c.seconds < 1.0;
  c.detail = std::to_string(inst.size()) + " points, escape chains at " + std::to_string(present) + "/" +
             std::to_string(scales.size()) + " scales, " + std::to_string(sig.classes.size()) + " sigma classes, " +
             summary(rep);
  return c;
}

inline CriterionResult books(const SuiteOptions& opt) {
  CriterionResult c{5, "books: page classes and inclusion", false, {}, 0.0};
  detail::Stopwatch sw;
  SpaceRecipe rc;
  rc.pages = 50;
  rc.N = 1000;
  rc.name = "book";
  const auto B = share(generate(rc));
  rc.name = "discrete_book";
  const auto D = share(generate(rc));
  auto ladder_for = [](const FiniteCoarseInstance& i) {
    return ScaleLadder::make(ScaleLadder::default_for(i.truncation_radius()).r_values, {50, 64, 100},
                             i.truncation_radius());
  };
  const auto sysB = build_end_system(*B, ladder_for(*B), opt.jobs);
  const auto sysD = build_end_system(*D, ladder_for(*D), opt.jobs);
  const auto sigB = sigma_report(*B, sysB);
  const auto sigD = sigma_report(*D, sysD);
  const std::size_t top = sysB.R_levels() - 1;
  const std::size_t tB = threads(sysB, top).size(), tD = threads(sysD, sysD.R_levels() - 1).size();
  const auto ind = induced_end_map(label_inclusion(D, B), sysD, sysB);
  std::size_t checked = 0, good = 0;
  for (std::size_t Ri = 0; Ri < sysD.R_levels(); ++Ri) {
    const auto tm = thread_map(ind, sysD, sysB, Ri);
    if (!tm) continue;
    ++checked;
    bool pages_match = tm->bijective;
    for (const auto& [src, imgs] : tm->images)
      pages_match = pages_match && imgs.size() == 1 && detail::page_of(D->label(src)) == detail::page_of(B->label(imgs[0]));
    good += pages_match;
  }
  c.seconds = sw.seconds();
  c.passed = sigB.classes.size() == 50 && sigD.classes.size() == 50 && tB == 50 && tD == 50 && ind.defined &&
             checked > 0 && good == checked;
  c.detail = "book " + std::to_string(sigB.classes.size()) + " classes/" + std::to_string(tB) + " threads, discrete " +
             std::to_string(sigD.classes.size()) + "/" + std::to_string(tD) + ", inclusion bijective on pages at " +
             std::to_string(good) + "/" + std::to_string(checked) + " scales";
  return c;
}

/// Moderate-size versions of every recipe, then 100 seeded perturbations.
inline std::vector<SpaceRecipe> consequence_recipes() {
  std::vector<SpaceRecipe> base;
  auto add = [&](std::string name, long N, long pages = 5) {
    SpaceRecipe r;
    r.name = std::move(name);
    r.N = N;
    r.pages = pages;
    base.push_back(r);
  };
  add("line", 200);
  add("grid2d", 15);
  add("vase", 100);
  add("flared_vase", 100);
  add("squares", 10000);
  add("book", 100);
  add("discrete_book", 100);
  std::vector<SpaceRecipe> all = base;
  for (std::uint64_t i = 0; i < 100; ++i) {
    SpaceRecipe r = base[i % base.size()];
    r.seed = 1000 + i;
    r.jitter = 0.05 + 0.25 * static_cast<double>(i % 5) / 4.0;
    all.push_back(r);
  }
  return all;
}

inline CriterionResult nonscattering_consequences(const SuiteOptions& opt) {
  CriterionResult c{6, "non-scattering consequences", false, {}, 0.0};
  detail::Stopwatch sw;
  std::size_t witnessed = 0, violations = 0, total = 0;
  for (const auto& rc : consequence_recipes()) {
    const auto inst = generate(rc);
    const auto sys = build_end_system(inst, ScaleLadder::default_for(inst.truncation_radius()), opt.jobs);
    ++total;
    const auto w = nonscattering_witness(sys);
    if (!w) continue;
    ++witnessed;
    const auto cons = check_consequences(sys, *w, sigma_report(inst, sys));
    violations += !cons.holds();
  }
  c.seconds = sw.seconds();
  c.passed = violations == 0 && witnessed > 0;
  c.detail = std::to_string(total) + " instances, " + std::to_string(witnessed) + " witnessed, " +
             std::to_string(violations) + " violations";
  return c;
}

inline CriterionResult oracle_equivalence(const SuiteOptions& opt) {
  CriterionResult c{7, "oracle equivalence", false, {}, 0.0};
  detail::Stopwatch sw;
  std::mt19937_64 rng(7);
  std::size_t cells = 0, mismatches = 0;
  for (int i = 0; i < 200; ++i) {
    const auto rc = random_case(rng);
    const auto sys = build_end_system(*rc.instance, rc.ladder, opt.jobs);
    const auto d = oracle::distance_matrix(*rc.instance);
    for (std::size_t ri = 0; ri < sys.r_levels(); ++ri)
      for (std::size_t Ri = 0; Ri < sys.R_levels(); ++Ri) {
        ++cells;
        const auto expect =
            oracle::closure_labels(d, rc.instance->basepoint(), rc.ladder.r_values[ri], rc.ladder.R_values[Ri]);
        mismatches += expect != sys.cell(ri, Ri).labels;
      }
  }
  c.seconds = sw.seconds();
  c.passed = mismatches == 0;
  c.detail = "200 instances, " + std::to_string(cells) + " cells, " + std::to_string(mismatches) + " mismatches";
  return c;
}

// Map pairs for functoriality: X -> Y -> Z shrinking instances so that
// preimages of target balls stay inside the source truncation.
struct MapTriple {
  InstancePtr X, Y, Z;
  EndSystem sx, sy, sz;
};

inline std::vector<double> transform_point(const std::vector<double>& x, double a, int quarter,
                                           const std::vector<double>& b) {
  if (x.size() == 1) return {a * x[0] + b[0]};
  double u = x[0], v = x[1];
  for (int q = 0; q < quarter; ++q) std::tie(u, v) = std::make_pair(-v, u);
  return {a * u + b[0], a * v + b[1]};
}

inline CriterionResult functoriality(const SuiteOptions& opt) {
  CriterionResult c{8, "functoriality and homotopy invariance", false, {}, 0.0};
  detail::Stopwatch sw;
  const std::vector<double> scales{1, 2, 4, 8, 16, 32, 64};
  auto build = [&](const std::string& name, long N, double spacing) {
    SpaceRecipe rc;
    rc.name = name;
    rc.N = N;
    rc.spacing = spacing;
    auto inst = share(generate(rc));
    auto ladder = ScaleLadder::make(ScaleLadder::default_for(inst->truncation_radius()).r_values, scales,
                                    inst->truncation_radius());
    return std::make_pair(inst, build_end_system(*inst, ladder, opt.jobs));
  };
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> scale(0.5, 2.0), shift(-5.0, 5.0), nudge(-3.0, 3.0);
  std::size_t comp_checked = 0, comp_bad = 0, homo_checked = 0, homo_bad = 0;
  for (int i = 0; i < 50; ++i) {
    const bool planar = i % 2 == 1;
    const std::string name = planar ? "grid2d" : "line";
    const double unit = planar ? 1.0 : 0.5 + 0.5 * static_cast<double>(rng() % 3);
    const auto [X, sx] = build(name, planar ? 16 : 400, unit);
    const auto [Y, sy] = build(name, planar ? 8 : 200, planar ? 1.0 : 0.5 + 0.5 * static_cast<double>(rng() % 3));
    const auto [Z, sz] = build(name, planar ? 4 : 100, 1.0);
    const std::size_t dim = planar ? 2 : 1;
    auto random_affine = [&] {
      const double a = scale(rng) * (rng() % 2 ? 1 : -1);
      const int q = planar ? static_cast<int>(rng() % 4) : 0;
      std::vector<double> b(dim);
      for (auto& x : b) x = shift(rng) * (planar ? 0.4 : 1.0);
      return [a, q, b](const std::vector<double>& x) { return transform_point(x, a, q, b); };
    };
    const auto fa = random_affine();
    const auto ga = random_affine();
    const auto f = nearest_point_map(X, Y, fa);
    const auto g = nearest_point_map(Y, Z, ga);
    const auto F = induced_end_map(f, sx, sy);
    const auto G = induced_end_map(g, sy, sz);
    const auto GF = induced_end_map(compose(g, f), sx, sz);
    for (const auto& cell : F.cells) {
      const auto composed = compose(cell, G);
      const CellMap* direct = GF.find(cell.source);
      if (!composed || !direct) continue;
      ++comp_checked;
      comp_bad += disagreements(*composed, *direct, sz);
    }

    std::vector<double> delta(dim);
    for (auto& x : delta) x = nudge(rng);
    const auto f2 = nearest_point_map(X, Y, [&](const std::vector<double>& x) {
      auto y = fa(x);
      for (std::size_t k = 0; k < dim; ++k) y[k] += delta[k];
      return y;
    });
    const double C = homotopy_distance(f, f2);
    const auto F2 = induced_end_map(f2, sx, sy);
    std::size_t min_R = scales.size();
    for (std::size_t j = 0; j < scales.size() && min_R == scales.size(); ++j)
      if (within(C, scales[j])) min_R = j;
    if (min_R == scales.size()) continue;
    for (const auto& cell : F.cells) {
      const CellMap* other = F2.find(cell.source);
      if (!other) continue;
      ++homo_checked;
      homo_bad += disagreements(cell, *other, sy, min_R);
    }
  }
  c.seconds = sw.seconds();
  c.passed = comp_bad == 0 && homo_bad == 0 && comp_checked > 0 && homo_checked > 0;
  c.detail = "50 pairs, composition " + std::to_string(comp_bad) + " violations in " + std::to_string(comp_checked) +
             " cells, homotopy " + std::to_string(homo_bad) + " violations in " + std::to_string(homo_checked) + " cells";
  return c;
}

inline CriterionResult schema_spot_checks(const SuiteOptions& opt) {
  CriterionResult c{9, "schema spot evaluation", false, {}, 0.0};
  detail::Stopwatch sw;
  std::size_t schemas = 0, chains = 0, failures = 0;
  for (const auto& name : descriptor_names()) {
    const auto sh = shipped(name, opt.data_dir);
    std::vector<double> xi;
    for (const auto& x : sh.space.basepoint) xi.push_back(x.convert_to<double>());
    auto norm = [&](const std::vector<double>& a, const std::vector<double>& b) {
      double d = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i)
        d = sh.space.norm == hyper::Norm::euclidean ? d + (a[i] - b[i]) * (a[i] - b[i])
                                                    : std::max(d, std::abs(a[i] - b[i]));
      return sh.space.norm == hyper::Norm::euclidean ? std::sqrt(d) : d;
    };
    for (const auto& s : sh.certs.schemas) {
      ++schemas;
      const double R = s.scale.convert_to<double>();
      for (int mult : {1, 2, 10}) {
        const hyper::Rational t = s.t0 * mult;
        const double g = s.escape_bound(t).convert_to<double>();
        std::vector<std::vector<double>> pts;
        for (const auto& p : hyper::evaluate_chain(s, t)) {
          std::vector<double> q;
          for (const auto& x : p) q.push_back(x.convert_to<double>());
          pts.push_back(std::move(q));
        }
        ++chains;
        bool ok = !pts.empty();
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) ok = ok && within(norm(pts[i], pts[i + 1]), R);
        for (const auto& p : pts) ok = ok && norm(p, xi) >= g - kRelTol * std::abs(g);
        failures += !ok;
      }
    }
  }
  c.seconds = sw.seconds();
  c.passed = failures == 0 && schemas > 0;
  c.detail = std::to_string(schemas) + " schemas, " + std::to_string(chains) + " chains, " + std::to_string(failures) +
             " failures";
  return c;
}

inline std::vector<std::function<CriterionResult(const SuiteOptions&)>> criteria() {
  return {line_ends, plane_ends, vases, squares, books, nonscattering_consequences, oracle_equivalence,
          functoriality, schema_spot_checks};
}

inline std::string format_line(const CriterionResult& r) {
  return std::string(r.passed ? "PASS" : "FAIL") + " [" + std::to_string(r.id) + "] " + r.name + ": " + r.detail +
         " (" + detail::fmt(r.seconds) + " s)";
}

/// Timings stay out of the JSON form so reports are reproducible.
inline json to_json(const CriterionResult& r) {
  return {{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}};
}

}  // namespace coarse::battery
