#pragma once
// Non-scattering witnesses: a single scale chain-connecting every annulus.

#include <optional>

#include "coarse/filtration.hpp"
#include "coarse/sigma.hpp"

namespace coarse {

struct NonscatteringWitness {
  std::size_t scale_index = 0;
  double scale = 0.0;
  /// Cut-offs whose annulus has at most one component at the witness scale.
  std::vector<double> verified_cutoffs;
};

/// Least ladder scale at which every annulus has <= 1 component.
inline std::optional<NonscatteringWitness> nonscattering_witness(const EndSystem& sys) {
  for (std::size_t Ri = 0; Ri < sys.R_levels(); ++Ri) {
    bool ok = true;
    for (std::size_t ri = 0; ri < sys.r_levels() && ok; ++ri) ok = sys.count(ri, Ri) <= 1;
    if (!ok) continue;
    return NonscatteringWitness{Ri, sys.ladder().R_values[Ri], sys.ladder().r_values};
  }
  return std::nullopt;
}

inline std::optional<NonscatteringWitness> nonscattering_witness(const FiniteCoarseInstance& inst,
                                                                 const ScaleLadder& ladder) {
  return nonscattering_witness(build_end_system(inst, ladder));
}

/// Checks a witnessed system must pass at finite scale.
struct NonscatteringConsequences {
  StabilityReport stability;  // on scales at or above the witness
  bool stabilized_at_most_one = false;
  bool sigma_at_most_one = false;
  bool outer_nonempty = false;
  bool omega_bijective = false;
  bool witness_monotone = false;

  bool holds() const {
    return stabilized_at_most_one && sigma_at_most_one && witness_monotone &&
           (!outer_nonempty || omega_bijective);
  }
};

/// Checks the consequences of a witness. Stability is assessed on the scales
/// from the witness upward, with the window shrunk to what remains.
inline NonscatteringConsequences check_consequences(const EndSystem& sys, const NonscatteringWitness& w,
                                                    const SigmaReport& sigma, std::size_t q = 3) {
  NonscatteringConsequences out;
  const auto above = sys.restricted_to_scales(w.scale_index);
  const std::size_t window = std::min({q, above.r_levels(), above.R_levels()});
  out.stability = stable_end_count(above, window);
  out.stabilized_at_most_one =
      out.stability.status == Stability::stabilized && out.stability.stable_count <= 1;
  out.sigma_at_most_one = sigma.classes.size() <= 1;
  out.outer_nonempty = sys.count(sys.r_levels() - 1, sys.R_levels() - 1) > 0;
  out.omega_bijective = omega_map(sigma, sys).bijective();
  out.witness_monotone = true;
  for (std::size_t Ri = w.scale_index; Ri < sys.R_levels(); ++Ri)
    for (std::size_t ri = 0; ri < sys.r_levels(); ++ri)
      out.witness_monotone = out.witness_monotone && sys.count(ri, Ri) <= 1;
  return out;
}

}  // namespace coarse
