#pragma once
// Brute-force reference for annulus chain components: a full distance matrix
// (Floyd-Warshall for graphs) and the transitive closure of the step-<=R
// relation (Warshall on bit rows). Shares nothing with the union-find
// filtration or the neighbor search.

#include <cstdint>
#include <vector>

#include "coarse/core.hpp"

namespace coarse::oracle {

using Matrix = std::vector<std::vector<double>>;

inline Matrix distance_matrix(const FiniteCoarseInstance& inst) {
  const std::size_t n = inst.size();
  Matrix d(n, std::vector<double>(n, kInfinity));
  if (!inst.is_graph()) {
    for (PointId i = 0; i < n; ++i)
      for (PointId j = 0; j < n; ++j)
        d[i][j] = FiniteCoarseInstance::coordinate_distance(inst.metric(), inst.coords(i), inst.coords(j));
    return d;
  }
  for (PointId i = 0; i < n; ++i) {
    d[i][i] = 0.0;
    for (const auto& arc : inst.adjacency().out(i)) d[i][arc.to] = std::min(d[i][arc.to], arc.weight);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(d[i][k])) continue;
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    }
  return d;
}

/// Labels (minimum member id, kNoPoint outside the annulus) of the chain
/// components of {x : d(xi, x) >= r} at step size R.
inline std::vector<PointId> closure_labels(const Matrix& d, PointId base, double r, double R) {
  const std::size_t n = d.size();
  const std::size_t words = (n + 63) / 64;
  std::vector<char> in(n);
  for (std::size_t i = 0; i < n; ++i) in[i] = in_annulus(d[base][i], r);
  std::vector<std::vector<std::uint64_t>> reach(n, std::vector<std::uint64_t>(words, 0));
  for (std::size_t i = 0; i < n; ++i) {
    if (!in[i]) continue;
    for (std::size_t j = 0; j < n; ++j)
      if (in[j] && (i == j || within(d[i][j], R))) reach[i][j / 64] |= std::uint64_t{1} << (j % 64);
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!in[k]) continue;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(reach[i][k / 64] >> (k % 64) & 1)) continue;
      for (std::size_t w = 0; w < words; ++w) reach[i][w] |= reach[k][w];
    }
  }
  std::vector<PointId> labels(n, kNoPoint);
  for (std::size_t i = 0; i < n; ++i) {
    if (!in[i]) continue;
    for (std::size_t j = 0; j <= i; ++j)
      if (reach[i][j / 64] >> (j % 64) & 1) {
        labels[i] = static_cast<PointId>(j);
        break;
      }
  }
  return labels;
}

}  // namespace coarse::oracle
