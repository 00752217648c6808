#pragma once
// Example spaces as finite instances and as parametric descriptors, seeded
// perturbations, file ingestion and report output.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "coarse/core.hpp"
#include "coarse/hyper.hpp"

namespace coarse {

struct SpaceRecipe {
  std::string name = "line";
  /// Truncation N for line and grid2d, arm height for vases and books.
  long N = 100;
  long pages = 5;
  double spacing = 1.0;
  /// Truncation radius; defaults to the largest radius attained.
  std::optional<double> rho;
  MetricKind metric = MetricKind::euclidean;
  std::uint64_t seed = 0;
  /// Coordinate (or relative edge weight) noise amplitude; 0 disables.
  double jitter = 0.0;
};

inline const std::vector<std::string>& recipe_names() {
  static const std::vector<std::string> names{"line", "grid2d", "vase", "flared_vase", "squares", "book",
                                              "discrete_book"};
  return names;
}

namespace detail {

inline void perturb(CloudTable& t, std::size_t base, std::uint64_t seed, double jitter) {
  if (jitter == 0.0) return;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-jitter, jitter);
  for (std::size_t i = 0; i < t.ids.size(); ++i)
    for (std::size_t d = 0; d < t.dim; ++d) {
      const double e = noise(rng);
      if (i != base) t.coords[i * t.dim + d] += e;
    }
}

inline void perturb(EdgeTable& g, std::uint64_t seed, double jitter) {
  if (jitter == 0.0) return;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-jitter, jitter);
  for (auto& e : g.edges) e.weight *= 1.0 + noise(rng);
}

inline double attained_radius(const FiniteCoarseInstance& inst) {
  double r = 0.0;
  for (double x : inst.radii())
    if (std::isfinite(x)) r = std::max(r, x);
  return r;
}

inline FiniteCoarseInstance finish_cloud(CloudTable t, std::size_t base, const SpaceRecipe& rc) {
  perturb(t, base, rc.seed, rc.jitter);
  const std::string xi = t.ids[base];
  if (rc.rho) return FiniteCoarseInstance::from_cloud(t, rc.metric, xi, *rc.rho);
  const auto all = FiniteCoarseInstance::from_cloud(t, rc.metric, xi, kInfinity);
  return FiniteCoarseInstance::from_cloud(t, rc.metric, xi, attained_radius(all));
}

inline FiniteCoarseInstance finish_graph(EdgeTable g, const std::string& xi, const SpaceRecipe& rc) {
  perturb(g, rc.seed, rc.jitter);
  if (rc.rho) return FiniteCoarseInstance::from_graph(g, xi, *rc.rho);
  const auto all = FiniteCoarseInstance::from_graph(g, xi, kInfinity);
  return FiniteCoarseInstance::from_graph(g, xi, attained_radius(all));
}

inline void add_point(CloudTable& t, std::string id, std::initializer_list<double> xs) {
  t.ids.push_back(std::move(id));
  t.coords.insert(t.coords.end(), xs);
}

/// Pages 1..k hanging off the wedge point "o"; page i has points at
/// multiples of step(i) up to height H.
template <class Step>
EdgeTable book_graph(long k, long H, Step step) {
  EdgeTable g;
  g.vertices.push_back("o");
  for (long i = 1; i <= k; ++i) {
    const double s = step(i);
    std::string prev = "o";
    for (long j = 1; j * s <= static_cast<double>(H) * (1 + kRelTol); ++j) {
      std::ostringstream name;
      name << "p" << i << ":" << j * s;
      g.vertices.push_back(name.str());
      g.edges.push_back({prev, name.str(), s});
      prev = name.str();
    }
  }
  return g;
}

}  // namespace detail

/// Deterministic finite instance for a recipe.
inline FiniteCoarseInstance generate(const SpaceRecipe& rc) {
  if (rc.N < 0) throw InputError("N must be nonnegative");
  if (!(rc.spacing > 0.0) || !std::isfinite(rc.spacing)) throw InputError("spacing must be positive");
  if (rc.jitter < 0.0 || !std::isfinite(rc.jitter)) throw InputError("jitter must be nonnegative");
  const double N = static_cast<double>(rc.N);
  CloudTable t;
  if (rc.name == "line") {
    t.dim = 1;
    const long steps = static_cast<long>(std::floor(N / rc.spacing * (1 + kRelTol)));
    std::size_t base = 0;
    for (long k = -steps; k <= steps; ++k) {
      if (k == 0) base = t.ids.size();
      detail::add_point(t, std::to_string(k), {k * rc.spacing});
    }
    return detail::finish_cloud(std::move(t), base, rc);
  }
  if (rc.name == "grid2d") {
    t.dim = 2;
    std::size_t base = 0;
    for (long i = -rc.N; i <= rc.N; ++i)
      for (long j = -rc.N; j <= rc.N; ++j) {
        if (i == 0 && j == 0) base = t.ids.size();
        detail::add_point(t, std::to_string(i) + ":" + std::to_string(j), {i * rc.spacing, j * rc.spacing});
      }
    return detail::finish_cloud(std::move(t), base, rc);
  }
  if (rc.name == "vase" || rc.name == "flared_vase") {
    t.dim = 2;
    detail::add_point(t, "b-1", {-1.0, 1.0});
    detail::add_point(t, "b0", {0.0, 1.0});
    detail::add_point(t, "b1", {1.0, 1.0});
    const double diag = rc.spacing / std::sqrt(2.0);
    for (long j = 1; j <= rc.N; ++j) {
      if (rc.name == "vase") {
        detail::add_point(t, "L" + std::to_string(j), {-1.0, 1.0 + j * rc.spacing});
        detail::add_point(t, "R" + std::to_string(j), {1.0, 1.0 + j * rc.spacing});
      } else {
        detail::add_point(t, "L" + std::to_string(j), {-(1.0 + j * diag), 1.0 + j * diag});
        detail::add_point(t, "R" + std::to_string(j), {1.0 + j * diag, 1.0 + j * diag});
      }
    }
    return detail::finish_cloud(std::move(t), 1, rc);
  }
  if (rc.name == "squares") {
    t.dim = 1;
    const double rho = rc.rho.value_or(N);
    for (long n = 0; static_cast<double>(n) * n <= rho; ++n)
      detail::add_point(t, std::to_string(n), {static_cast<double>(n) * n});
    SpaceRecipe fixed = rc;
    fixed.rho = rho;
    return detail::finish_cloud(std::move(t), 0, fixed);
  }
  if (rc.name == "book" || rc.name == "discrete_book") {
    if (rc.pages < 1) throw InputError("a book needs at least one page");
    const bool discrete = rc.name == "discrete_book";
    auto g = detail::book_graph(rc.pages, rc.N, [&](long i) { return discrete ? static_cast<double>(i) : rc.spacing; });
    return detail::finish_graph(std::move(g), "o", rc);
  }
  throw InputError("unknown recipe '" + rc.name + "'");
}

// ---------------------------------------------------------------- map recipes

/// Each source point goes to the target point nearest to transform(source
/// coordinates); ties resolve to the smaller target id.
template <class Transform>
CoarseMapSample nearest_point_map(const InstancePtr& src, const InstancePtr& tgt, Transform transform) {
  if (src->is_graph() || tgt->is_graph()) throw InputError("nearest-point maps need coordinate instances");
  std::vector<PointId> a(src->size());
  for (PointId x = 0; x < src->size(); ++x) {
    const std::vector<double> img = transform(std::vector<double>(src->coords(x).begin(), src->coords(x).end()));
    if (img.size() != tgt->dim()) throw InputError("transform has the wrong target dimension");
    double best = kInfinity;
    for (PointId y = 0; y < tgt->size(); ++y) {
      const double d = FiniteCoarseInstance::coordinate_distance(tgt->metric(), img, tgt->coords(y));
      if (d < best) {
        best = d;
        a[x] = y;
      }
    }
  }
  return CoarseMapSample(src, tgt, std::move(a));
}

/// Same-label inclusion, e.g. the discrete book into the book.
inline CoarseMapSample label_inclusion(const InstancePtr& src, const InstancePtr& tgt) {
  std::vector<PointId> a(src->size());
  for (PointId x = 0; x < src->size(); ++x) {
    const PointId y = tgt->find(src->label(x));
    if (y == kNoPoint) throw InputError("label '" + src->label(x) + "' missing from the target");
    a[x] = y;
  }
  return CoarseMapSample(src, tgt, std::move(a));
}

/// Everything to the target base point.
inline CoarseMapSample collapse_map(const InstancePtr& src, const InstancePtr& tgt) {
  return CoarseMapSample(src, tgt, std::vector<PointId>(src->size(), tgt->basepoint()));
}

// ---------------------------------------------------------------- parametric descriptors

inline const std::vector<std::string>& descriptor_names() {
  static const std::vector<std::string> names{"line", "grid2d", "vase", "flared_vase"};
  return names;
}

namespace detail {

using hyper::Poly;
using hyper::Poly2;
using hyper::Rational;

inline Poly P(std::initializer_list<long> c) {
  std::vector<Rational> v;
  for (long x : c) v.emplace_back(x);
  return Poly(std::move(v));
}

inline hyper::Piece ray(std::string name, std::vector<Poly> coords, long from) {
  return {std::move(name), hyper::PieceKind::ray, std::move(coords), Rational(from), 0, false};
}

inline hyper::Piece segment(std::string name, std::vector<Poly> coords, long from, long to) {
  return {std::move(name), hyper::PieceKind::segment, std::move(coords), Rational(from), Rational(to), false};
}

inline hyper::Representative rep(std::string name, std::vector<Poly> coords) {
  return {std::move(name), hyper::SymbolicPoint{std::move(coords), 1}};
}

/// A k-linear coordinate a(t) + b(t) k.
inline Poly2 lin(Poly a, Poly b = {}) { return Poly2(std::vector<Poly>{std::move(a), std::move(b)}); }

}  // namespace detail

/// Parametric descriptor of an example space.
inline hyper::ParametricSpace descriptor(const std::string& name) {
  using detail::P;
  hyper::ParametricSpace s;
  s.name = name;
  if (name == "line") {
    s.dim = 1;
    s.basepoint = {0};
    s.pieces = {detail::ray("positive", {P({0, 1})}, 0), detail::ray("negative", {P({0, -1})}, 0)};
  } else if (name == "grid2d") {
    s.dim = 2;
    s.norm = hyper::Norm::sup;
    s.basepoint = {0, 0};
    s.pieces = {hyper::Piece{"lattice", hyper::PieceKind::ambient, {}, 0, 0, true}};
  } else if (name == "vase" || name == "flared_vase") {
    s.dim = 2;
    s.basepoint = {0, 1};
    const long lean = name == "vase" ? 0 : 1;
    auto arm_x = [&](long sign) { return lean ? P({0, sign}) : P({sign}); };
    s.pieces = {detail::ray("left", {arm_x(-1), P({0, 1})}, 1), detail::ray("right", {arm_x(1), P({0, 1})}, 1),
                detail::segment("base", {P({0, 1}), P({1})}, -1, 1)};
  } else {
    throw InputError("no parametric descriptor for '" + name + "'");
  }
  hyper::validate(s);
  return s;
}

/// Representatives and certificates shipped with each descriptor.
inline hyper::Certificates certificates(const std::string& name) {
  using detail::lin;
  using detail::P;
  hyper::Certificates c;
  if (name == "line") {
    c.representatives = {detail::rep("plus", {P({0, 1})}), detail::rep("minus", {P({0, -1})})};
    c.gaps = {hyper::GapCertificate{"opposite-rays", 1, {"positive"}, {"negative"}, P({1}), false}};
  } else if (name == "grid2d") {
    c.representatives = {detail::rep("east", {P({0, 1}), P({})}), detail::rep("north", {P({}), P({0, 1})}),
                         detail::rep("west", {P({0, -1}), P({})})};
    // (t,0) -> (t,t) -> (-t,t) -> (-t,0) by unit axis steps.
    hyper::ChainSchema rect{"rectangle", 1, 1, P({0, 1}), {}};
    rect.segments = {{{lin(P({0, 1})), lin(P({}), P({1}))}, P({0, 1})},
                     {{lin(P({0, 1}), P({-1})), lin(P({0, 1}))}, P({0, 2})},
                     {{lin(P({0, -1})), lin(P({0, 1}), P({-1}))}, P({0, 1})}};
    hyper::ChainSchema corner{"east-to-north", 1, 1, P({0, 1}), {}};
    corner.segments = {{{lin(P({0, 1})), lin(P({}), P({1}))}, P({0, 1})},
                       {{lin(P({0, 1}), P({-1})), lin(P({0, 1}))}, P({0, 1})}};
    c.schemas = {rect, corner};
  } else if (name == "vase") {
    c.representatives = {detail::rep("left", {P({-1}), P({0, 1})}), detail::rep("right", {P({1}), P({0, 1})})};
    hyper::ChainSchema rung{"rung", 2, 1, P({-1, 1}), {}};
    rung.segments = {{{lin(P({-1}), P({2})), lin(P({0, 1}))}, P({1})}};
    c.schemas = {rung};
  } else if (name == "flared_vase") {
    c.representatives = {detail::rep("left", {P({0, -1}), P({0, 1})}), detail::rep("right", {P({0, 1}), P({0, 1})})};
    c.gaps = {hyper::GapCertificate{"widening-arms", 3, {"left"}, {"right"}, P({0, 1}), false}};
  } else {
    throw InputError("no certificates for '" + name + "'");
  }
  return c;
}

// ---------------------------------------------------------------- files

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  if (sep == ',') {
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
  } else {
    std::istringstream in(line);
    std::string field;
    while (in >> field) out.push_back(field);
  }
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t\r");
    const auto e = f.find_last_not_of(" \t\r");
    f = b == std::string::npos ? std::string{} : f.substr(b, e - b + 1);
  }
  return out;
}

inline double parse_number(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw InputError("line " + std::to_string(line_no) + ": '" + s + "' is not a number");
  return v;
}

inline bool skippable(const std::string& line) {
  const auto b = line.find_first_not_of(" \t\r");
  return b == std::string::npos || line[b] == '#';
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace detail

/// CSV rows "id,x1,...,xd"; an optional header row starts with "id".
inline CloudTable read_cloud_csv(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  CloudTable t;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::skippable(line)) continue;
    const auto fields = detail::split_fields(line, ',');
    if (first && !fields.empty() && fields[0] == "id") {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() < 2) throw InputError("line " + std::to_string(line_no) + ": expected id and coordinates");
    if (t.dim == 0) t.dim = fields.size() - 1;
    if (fields.size() - 1 != t.dim)
      throw InputError("line " + std::to_string(line_no) + ": expected " + std::to_string(t.dim) + " coordinates");
    if (fields[0].empty()) throw InputError("line " + std::to_string(line_no) + ": empty id");
    t.ids.push_back(fields[0]);
    for (std::size_t i = 1; i < fields.size(); ++i) t.coords.push_back(detail::parse_number(fields[i], line_no));
  }
  return t;
}

/// Whitespace-separated "u v w" rows; a row with a single token declares an
/// isolated vertex. An optional vertex list file holds one id per line.
inline EdgeTable read_edge_list(const std::filesystem::path& path,
                                const std::optional<std::filesystem::path>& vertex_list = {}) {
  EdgeTable g;
  std::string line;
  std::size_t line_no = 0;
  if (vertex_list) {
    auto vin = detail::open_input(*vertex_list);
    while (std::getline(vin, line)) {
      ++line_no;
      if (detail::skippable(line)) continue;
      const auto f = detail::split_fields(line, ' ');
      if (f.size() != 1) throw InputError("vertex list line " + std::to_string(line_no) + ": expected one id");
      g.vertices.push_back(f[0]);
    }
  }
  auto in = detail::open_input(path);
  line_no = 0;
  std::set<std::string> seen(g.vertices.begin(), g.vertices.end());
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::skippable(line)) continue;
    const auto f = detail::split_fields(line, ' ');
    if (f.size() == 1) {
      if (seen.insert(f[0]).second) g.vertices.push_back(f[0]);
      continue;
    }
    if (f.size() != 3) throw InputError("line " + std::to_string(line_no) + ": expected 'u v weight'");
    g.edges.push_back({f[0], f[1], detail::parse_number(f[2], line_no)});
  }
  return g;
}

inline FiniteCoarseInstance load_cloud(const std::filesystem::path& path, MetricKind metric,
                                       const std::string& basepoint, std::optional<double> rho) {
  const auto t = read_cloud_csv(path);
  if (rho) return FiniteCoarseInstance::from_cloud(t, metric, basepoint, *rho);
  return FiniteCoarseInstance::from_cloud(
      t, metric, basepoint, detail::attained_radius(FiniteCoarseInstance::from_cloud(t, metric, basepoint, kInfinity)));
}

inline FiniteCoarseInstance load_graph(const std::filesystem::path& path, const std::string& basepoint,
                                       std::optional<double> rho,
                                       const std::optional<std::filesystem::path>& vertex_list = {}) {
  const auto g = read_edge_list(path, vertex_list);
  if (rho) return FiniteCoarseInstance::from_graph(g, basepoint, *rho);
  return FiniteCoarseInstance::from_graph(
      g, basepoint, detail::attained_radius(FiniteCoarseInstance::from_graph(g, basepoint, kInfinity)));
}

/// Writes pretty JSON; refuses to replace an existing file unless forced.
inline void save_report(const nlohmann::json& report, const std::filesystem::path& path, bool force = false) {
  if (std::filesystem::exists(path) && !force)
    throw InputError("refusing to overwrite '" + path.string() + "' (use --force)");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << report.dump(2) << '\n';
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

inline nlohmann::json load_json(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace coarse
