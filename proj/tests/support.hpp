#pragma once
// Small builders and seeded generators shared by the unit tests.

#include <random>

#include "coarse/checks.hpp"
#include "coarse/spaces.hpp"

namespace coarse::testing {

inline FiniteCoarseInstance recipe(const std::string& name, long N, std::optional<double> rho = {}, long pages = 5) {
  SpaceRecipe rc;
  rc.name = name;
  rc.N = N;
  rc.rho = rho;
  rc.pages = pages;
  return generate(rc);
}

inline InstancePtr shared_recipe(const std::string& name, long N, std::optional<double> rho = {}, long pages = 5) {
  return share(recipe(name, N, rho, pages));
}

/// Two weighted paths a0-a1-a2 and b0-b1 with no edge between them.
inline FiniteCoarseInstance two_component_graph() {
  EdgeTable g;
  g.edges = {{"a0", "a1", 1.5}, {"a1", "a2", 2.0}, {"b0", "b1", 1.0}};
  return FiniteCoarseInstance::from_graph(g, "a0", 10.0);
}

inline CloudTable line_table(long lo, long hi) {
  CloudTable t;
  t.dim = 1;
  for (long k = lo; k <= hi; ++k) {
    t.ids.push_back(std::to_string(k));
    t.coords.push_back(static_cast<double>(k));
  }
  return t;
}

/// Random cloud: n points in dim dimensions, coordinates in [-L, L], point
/// "0" at the origin as base. Untruncated unless finite_rho, which cuts at
/// the largest radius attained.
inline FiniteCoarseInstance random_cloud(std::mt19937_64& rng, std::size_t n, std::size_t dim, double L,
                                         MetricKind metric = MetricKind::euclidean, bool finite_rho = false) {
  std::uniform_real_distribution<double> u(-L, L);
  CloudTable t;
  t.dim = dim;
  for (std::size_t i = 0; i < n; ++i) {
    t.ids.push_back(std::to_string(i));
    for (std::size_t d = 0; d < dim; ++d) t.coords.push_back(i == 0 ? 0.0 : u(rng));
  }
  auto inst = FiniteCoarseInstance::from_cloud(t, metric, "0", kInfinity);
  if (!finite_rho) return inst;
  return FiniteCoarseInstance::from_cloud(t, metric, "0", coarse::detail::attained_radius(inst));
}

/// Random weighted graph on n vertices, possibly disconnected.
inline FiniteCoarseInstance random_graph(std::mt19937_64& rng, std::size_t n, std::size_t extra_edges,
                                         bool finite_rho = false) {
  std::uniform_real_distribution<double> w(0.0, 4.0);
  EdgeTable g;
  for (std::size_t i = 0; i < n; ++i) g.vertices.push_back("v" + std::to_string(i));
  for (std::size_t i = 1; i < n; ++i)
    if (rng() % 10 != 0) g.edges.push_back({g.vertices[rng() % i], g.vertices[i], w(rng)});
  for (std::size_t e = 0; e < extra_edges; ++e)
    g.edges.push_back({g.vertices[rng() % n], g.vertices[rng() % n], w(rng)});
  auto inst = FiniteCoarseInstance::from_graph(g, "v0", kInfinity);
  if (!finite_rho) return inst;
  return FiniteCoarseInstance::from_graph(g, "v0", coarse::detail::attained_radius(inst));
}

inline std::vector<PointId> ids(const FiniteCoarseInstance& inst, std::initializer_list<const char*> labels) {
  std::vector<PointId> out;
  for (const char* l : labels) out.push_back(inst.find(l));
  return out;
}

}  // namespace coarse::testing
