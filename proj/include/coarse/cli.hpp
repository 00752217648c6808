#pragma once
// The `coarse` command line: subcommands ends, sigma, nonscattering, hyper,
// maps and suite. Exit 0 on success, 1 on verification failure, 2 on input
// error.

#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <iostream>

#include "coarse/end_maps.hpp"
#include "coarse/hyper_io.hpp"
#include "coarse/nonscattering.hpp"
#include "coarse/report_json.hpp"
#include "coarse/spaces.hpp"
#include "coarse/suite.hpp"

namespace coarse::cli {

enum ExitCode : int { kOk = 0, kVerificationFailed = 1, kInputError = 2 };

/// "1,2,4" or "geom:START:RATIO:COUNT".
inline std::vector<double> parse_scale_list(const std::string& text) {
  std::vector<double> out;
  auto number = [&](const std::string& s) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw InputError("bad number '" + s + "' in '" + text + "'");
    return v;
  };
  if (text.rfind("geom:", 0) == 0) {
    std::vector<std::string> f;
    std::string cur;
    for (char ch : text.substr(5)) {
      if (ch == ':') {
        f.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    f.push_back(cur);
    if (f.size() != 3) throw InputError("geometric ladder needs geom:START:RATIO:COUNT");
    const double start = number(f[0]), ratio = number(f[1]), count = number(f[2]);
    if (!(start > 0) || !(ratio > 1) || count < 1 || count != std::floor(count))
      throw InputError("geometric ladder needs START > 0, RATIO > 1 and a positive integer COUNT");
    double v = start;
    for (int i = 0; i < static_cast<int>(count); ++i, v *= ratio) out.push_back(v);
    return out;
  }
  for (const auto& f : coarse::detail::split_fields(text, ',')) out.push_back(number(f));
  if (out.empty()) throw InputError("empty scale list");
  return out;
}

struct RunConfig {
  std::string recipe;
  std::string input;
  std::string format;  // csv | edges; inferred from the extension when empty
  std::string vertices;
  std::string basepoint;
  std::string metric = "euclidean";
  long N = 100;
  long pages = 5;
  double spacing = 1.0;
  std::optional<double> rho;
  std::uint64_t seed = 0;
  double jitter = 0.0;
  std::string ladder_r;
  std::string ladder_R;
  double margin = 0.1;
  std::size_t window = 3;
  std::size_t jobs = default_jobs();
  std::string out;
  bool force = false;
  std::string csv;
  // hyper
  std::string space;
  std::string certs;
  std::string dump_dir;
  // maps
  std::string map = "shift";
  double shift = 3.0;
  // suite
  std::string data_dir;
};

inline FiniteCoarseInstance load_instance(const RunConfig& c) {
  if (c.recipe.empty() == c.input.empty()) throw InputError("give exactly one of --recipe and --input");
  if (!c.recipe.empty()) {
    SpaceRecipe rc;
    rc.name = c.recipe;
    rc.N = c.N;
    rc.pages = c.pages;
    rc.spacing = c.spacing;
    rc.rho = c.rho;
    rc.metric = parse_metric(c.metric);
    rc.seed = c.seed;
    rc.jitter = c.jitter;
    return generate(rc);
  }
  std::string format = c.format;
  if (format.empty()) format = std::filesystem::path(c.input).extension() == ".csv" ? "csv" : "edges";
  if (c.basepoint.empty()) throw InputError("--input needs --basepoint");
  if (format == "csv") return load_cloud(c.input, parse_metric(c.metric), c.basepoint, c.rho);
  if (format == "edges") {
    std::optional<std::filesystem::path> vl;
    if (!c.vertices.empty()) vl = c.vertices;
    return load_graph(c.input, c.basepoint, c.rho, vl);
  }
  throw InputError("unknown input format '" + format + "'");
}

inline ScaleLadder ladder_for(const RunConfig& c, double rho) {
  ScaleLadder base = ScaleLadder::default_for(rho);
  std::vector<double> r = base.r_values, R = base.R_values;
  if (!c.ladder_r.empty()) {
    r = parse_scale_list(c.ladder_r);
    if (r.front() != 0.0) r.insert(r.begin(), 0.0);
  }
  if (!c.ladder_R.empty()) R = parse_scale_list(c.ladder_R);
  return ScaleLadder::make(std::move(r), std::move(R), rho);
}

/// JSON goes to --out when given (summary on stdout), else to stdout
/// (summary on stderr).
inline void emit(const RunConfig& c, const json& report, const std::string& line, std::ostream& out,
                 std::ostream& err) {
  if (c.out.empty()) {
    out << report.dump(2) << '\n';
    err << line << '\n';
  } else {
    save_report(report, c.out, c.force);
    out << line << '\n';
  }
}

inline int cmd_ends(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto inst = load_instance(c);
  const auto ladder = ladder_for(c, inst.truncation_radius());
  const auto sys = build_end_system(inst, ladder, c.jobs);
  const auto rep = stable_end_count(sys, c.window);
  json j{{"instance", instance_summary(inst)},
         {"stability", to_json(rep)},
         {"summary", summary(rep)},
         {"threads", thread_table(inst, sys, sys.R_levels() - 1)}};
  if (!c.csv.empty()) {
    if (std::filesystem::exists(c.csv) && !c.force) throw InputError("refusing to overwrite '" + c.csv + "'");
    std::ofstream(c.csv) << counts_csv(rep);
  }
  emit(c, j, summary(rep), out, err);
  return kOk;
}

inline int cmd_sigma(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto inst = load_instance(c);
  const auto sys = build_end_system(inst, ladder_for(c, inst.truncation_radius()), c.jobs);
  const auto sig = sigma_report(inst, sys, c.margin);
  const auto om = omega_map(sig, sys);
  json j{{"instance", instance_summary(inst)}, {"sigma", to_json(inst, sig, om)}};
  emit(c, j,
       std::to_string(sig.classes.size()) + " classes, " + std::to_string(om.thread_count) + " threads, omega " +
           (om.bijective() ? "bijective" : "not bijective"),
       out, err);
  return kOk;
}

inline int cmd_nonscattering(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto inst = load_instance(c);
  const auto sys = build_end_system(inst, ladder_for(c, inst.truncation_radius()), c.jobs);
  const auto w = nonscattering_witness(sys);
  json j{{"instance", instance_summary(inst)}, {"witness", to_json(w)}};
  std::string line = "no witness on this ladder";
  int code = kOk;
  if (w) {
    const auto cons = check_consequences(sys, *w, sigma_report(inst, sys, c.margin), c.window);
    j["consequences"] = to_json(cons);
    std::ostringstream s;
    s << "witness at R=" << w->scale << ", consequences " << (cons.holds() ? "hold" : "VIOLATED");
    line = s.str();
    if (!cons.holds()) code = kVerificationFailed;
  }
  emit(c, j, line, out, err);
  return code;
}

inline int cmd_hyper(const RunConfig& c, std::ostream& out, std::ostream& err) {
  hyper::ParametricSpace space;
  hyper::Certificates certs;
  if (!c.recipe.empty()) {
    space = descriptor(c.recipe);
    certs = certificates(c.recipe);
  } else {
    if (c.space.empty() || c.certs.empty()) throw InputError("hyper needs --recipe or both --space and --certs");
    space = hyper::space_from_json(load_json(c.space));
    certs = hyper::certificates_from_json(load_json(c.certs));
  }
  if (!c.dump_dir.empty()) {
    const std::filesystem::path dir(c.dump_dir);
    save_report(hyper::space_to_json(space), dir / (space.name + ".json"), c.force);
    save_report(hyper::certificates_to_json(certs), dir / battery::certs_file(space.name), c.force);
  }
  const auto rep = hyper::iota_report(space, certs);
  bool all_verified = true;
  for (const auto& s : rep.schemas) all_verified = all_verified && s.ok;
  for (const auto& g : rep.gaps) all_verified = all_verified && g.separates();
  const std::string line = std::to_string(rep.classes.size()) + " classes, " +
                           (rep.exact ? "all pairs decided" : "some pairs unknown") +
                           (all_verified ? "" : ", some certificates failed");
  emit(c, hyper::to_json(rep), line, out, err);
  return all_verified ? kOk : kVerificationFailed;
}

/// Named map samples between recipe instances.
struct MapPair {
  CoarseMapSample f;
  std::optional<CoarseMapSample> reference;  // a close map for the homotopy check
};

inline MapPair map_sample(const RunConfig& c) {
  SpaceRecipe rc;
  rc.N = c.N;
  rc.pages = c.pages;
  auto line = [&](long N, double spacing) {
    SpaceRecipe r = rc;
    r.name = "line";
    r.N = N;
    r.spacing = spacing;
    return share(generate(r));
  };
  auto scaled = [](double a, double b) {
    return [a, b](const std::vector<double>& x) { return std::vector<double>{a * x[0] + b}; };
  };
  if (c.map == "rounding") {
    auto X = line(c.N, 0.1), Y = line(c.N, 1.0);
    return {nearest_point_map(X, Y, scaled(1, 0)), std::nullopt};
  }
  if (c.map == "doubling") {
    auto X = line(c.N, 1.0), Y = line(2 * c.N, 1.0);
    return {nearest_point_map(X, Y, scaled(2, 0)), std::nullopt};
  }
  if (c.map == "shift") {
    auto X = line(c.N, 1.0), Y = line(c.N + static_cast<long>(std::ceil(std::abs(c.shift))), 1.0);
    return {nearest_point_map(X, Y, scaled(1, c.shift)), nearest_point_map(X, Y, scaled(1, 0))};
  }
  if (c.map == "collapse") {
    auto X = line(c.N, 1.0);
    return {collapse_map(X, X), std::nullopt};
  }
  if (c.map == "book_inclusion") {
    SpaceRecipe d = rc;
    d.name = "discrete_book";
    SpaceRecipe b = rc;
    b.name = "book";
    return {label_inclusion(share(generate(d)), share(generate(b))), std::nullopt};
  }
  if (c.map == "squares_inclusion") {
    SpaceRecipe s = rc;
    s.name = "squares";
    s.rho = static_cast<double>(c.N);
    auto X = share(generate(s));
    return {nearest_point_map(X, line(c.N, 1.0), scaled(1, 0)), std::nullopt};
  }
  throw InputError("unknown map '" + c.map +
                   "' (rounding, doubling, shift, collapse, book_inclusion, squares_inclusion)");
}

inline int cmd_maps(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto pair = map_sample(c);
  const auto& f = pair.f;
  const auto sx = build_end_system(f.source(), ladder_for(c, f.source().truncation_radius()), c.jobs);
  const auto sy = build_end_system(f.target(), ladder_for(c, f.target().truncation_radius()), c.jobs);
  const auto ind = induced_end_map(f, sx, sy);
  json j{{"map", c.map},
         {"source", instance_summary(f.source())},
         {"target", instance_summary(f.target())},
         {"induced", to_json(f.source(), f.target(), ind)}};
  std::string line = ind.defined ? "induced end map defined on " + std::to_string(ind.cells.size()) + " cells"
                                 : "not a coarse map: " + ind.failure;
  if (ind.defined) {
    if (auto tm = thread_map(ind, sx, sy, sx.R_levels() - 1)) {
      j["thread_map_bijective"] = tm->bijective;
      line += std::string(", thread map ") + (tm->bijective ? "bijective" : "not bijective");
    }
  }
  int code = ind.defined ? kOk : kVerificationFailed;
  if (pair.reference && ind.defined) {
    const double C = homotopy_distance(f, *pair.reference);
    const auto other = induced_end_map(*pair.reference, sx, sy);
    std::size_t min_R = sy.R_levels();
    for (std::size_t i = 0; i < sy.R_levels() && min_R == sy.R_levels(); ++i)
      if (within(C, sy.ladder().R_values[i])) min_R = i;
    std::size_t bad = 0, checked = 0;
    if (other.defined && min_R < sy.R_levels()) {
      for (const auto& cell : ind.cells)
        if (const CellMap* o = other.find(cell.source)) {
          ++checked;
          bad += disagreements(cell, *o, sy, min_R);
        }
    }
    j["homotopy"] = {{"distance", C}, {"cells_checked", checked}, {"disagreements", bad}};
    std::ostringstream s;
    s << ", homotopy distance " << C << " with " << bad << " disagreements";
    line += s.str();
    if (bad) code = kVerificationFailed;
  }
  emit(c, j, line, out, err);
  return code;
}

inline int cmd_suite(const RunConfig& c, std::ostream& out, std::ostream& /*err*/) {
  battery::SuiteOptions opt;
  opt.jobs = c.jobs;
  if (!c.data_dir.empty()) opt.data_dir = c.data_dir;
#ifdef COARSE_DATA_DIR
  else if (std::filesystem::exists(COARSE_DATA_DIR)) opt.data_dir = COARSE_DATA_DIR;
#endif
  json j = json::array();
  bool all = true;
  for (const auto& criterion : battery::criteria()) {
    const auto r = criterion(opt);
    out << battery::format_line(r) << std::endl;
    j.push_back(battery::to_json(r));
    all = all && r.passed;
  }
  if (!c.out.empty()) save_report(j, c.out, c.force);
  return all ? kOk : kVerificationFailed;
}

inline void add_instance_options(CLI::App* app, RunConfig& c) {
  app->add_option("--recipe", c.recipe, "Built-in space: line, grid2d, vase, flared_vase, squares, book, discrete_book");
  app->add_option("--input", c.input, "Point cloud CSV (id,x1..xd) or edge list (u v w)");
  app->add_option("--format", c.format, "Input format: csv or edges (default: from the extension)");
  app->add_option("--vertices", c.vertices, "Vertex list for edge-list input");
  app->add_option("--basepoint", c.basepoint, "Base point id for file input");
  app->add_option("--metric", c.metric, "euclidean, chebyshev (clouds)");
  app->add_option("--N", c.N, "Truncation N / height");
  app->add_option("--pages", c.pages, "Page count for books");
  app->add_option("--spacing", c.spacing, "Point spacing");
  app->add_option("--rho", c.rho, "Truncation radius (default: largest radius attained)");
  app->add_option("--seed", c.seed, "Seed for --jitter");
  app->add_option("--jitter", c.jitter, "Perturbation amplitude");
  app->add_option("--ladder-r", c.ladder_r, "Cut-offs: comma list or geom:START:RATIO:COUNT (0 is prepended)");
  app->add_option("--ladder-R", c.ladder_R, "Scales: comma list or geom:START:RATIO:COUNT");
  app->add_option("--margin", c.margin, "Escape shell margin");
  app->add_option("--window", c.window, "Stabilization window q");
}

inline void add_output_options(CLI::App* app, RunConfig& c) {
  app->add_option("--out", c.out, "Write the JSON report here");
  app->add_flag("--force", c.force, "Overwrite existing output files");
  app->add_option("--jobs", c.jobs, "Worker threads (default: COARSE_JOBS or 1)");
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Ends of finite coarse spaces and certificate checks for their parametric models", "coarse"};
  app.require_subcommand(1);
  RunConfig c;
  struct Sub {
    CLI::App* app;
    int (*fn)(const RunConfig&, std::ostream&, std::ostream&);
  };
  std::vector<Sub> subs;
  auto* ends = app.add_subcommand("ends", "End system and stabilization status");
  add_instance_options(ends, c);
  add_output_options(ends, c);
  ends->add_option("--csv", c.csv, "Also write the count matrix as CSV");
  subs.push_back({ends, cmd_ends});
  auto* sigma = app.add_subcommand("sigma", "Escape-chain classes and the omega table");
  add_instance_options(sigma, c);
  add_output_options(sigma, c);
  subs.push_back({sigma, cmd_sigma});
  auto* ns = app.add_subcommand("nonscattering", "Non-scattering witness and its consequences");
  add_instance_options(ns, c);
  add_output_options(ns, c);
  subs.push_back({ns, cmd_nonscattering});
  auto* hy = app.add_subcommand("hyper", "Verify certificates and classify infinite points");
  hy->add_option("--space", c.space, "Parametric space descriptor JSON");
  hy->add_option("--certs", c.certs, "Certificate JSON");
  hy->add_option("--recipe", c.recipe, "Built-in descriptor: line, grid2d, vase, flared_vase");
  hy->add_option("--dump-dir", c.dump_dir, "Write the descriptor and certificates used into this directory");
  add_output_options(hy, c);
  subs.push_back({hy, cmd_hyper});
  auto* maps = app.add_subcommand("maps", "Bornology, properness, homotopy and the induced end map of a map sample");
  maps->add_option("--map", c.map, "rounding, doubling, shift, collapse, book_inclusion, squares_inclusion");
  maps->add_option("--shift", c.shift, "Offset for the shift map");
  maps->add_option("--N", c.N, "Size parameter");
  maps->add_option("--pages", c.pages, "Page count for book_inclusion");
  maps->add_option("--ladder-r", c.ladder_r, "Cut-offs");
  maps->add_option("--ladder-R", c.ladder_R, "Scales");
  add_output_options(maps, c);
  subs.push_back({maps, cmd_maps});
  auto* suite = app.add_subcommand("suite", "Run the acceptance battery");
  suite->add_option("--data", c.data_dir, "Directory of shipped descriptors");
  add_output_options(suite, c);
  subs.push_back({suite, cmd_suite});

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  try {
    for (const auto& s : subs)
      if (s.app->parsed()) return s.fn(c, out, err);
  } catch (const hyper::InconsistentCertificates& e) {
    err << "error: " << e.what() << '\n';
    return kVerificationFailed;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace coarse::cli
