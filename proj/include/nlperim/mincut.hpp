#ifndef NLPERIM_MINCUT_HPP
#define NLPERIM_MINCUT_HPP

#include <cstdint>
#include <vector>

#include "nlperim/energy.hpp"
#include "nlperim/grid.hpp"
#include "nlperim/weights.hpp"

namespace nlperim {

/// Exact global minimization of P_{K,Omega} with fixed exterior data.  The
/// energy over interior labelings is a cut function (all weights are
/// nonnegative), so the optimum is a minimum s-t cut; E_min / E_max are the
/// source-side minimal and maximal minimum cuts.
struct MinimizeResult {
  GridSet e_min, e_max;
  double energy = 0;     // P_{K,Omega}(E_min) via k_perimeter
  double cut_value = 0;  // max-flow value; reconciles with `energy`
  std::int64_t nodes = 0, arcs = 0;
  double seconds = 0;
};

MinimizeResult minimize(const DomainMask& omega, const InteractionWeights& w);

/// Exhaustive enumeration of all 2^m interior states (m <= 25).  Returns the
/// optimal energy and every optimal interior labeling within `tie_tol`.
struct EnumerationResult {
  double min_energy = 0;
  std::vector<std::vector<std::uint8_t>> optimal_interiors;  // world-sized bit arrays
};
EnumerationResult enumerate_minimum(const DomainMask& omega, const InteractionWeights& w,
                                    double tie_tol = 0.0);

struct MutualInclusionReport {
  int trials = 0;
  int violations = 0;         // E_min not contained in E_max
  int sandwich_failures = 0;  // some enumerated optimum outside [E_min, E_max]
  bool enumerated = false;
  bool pass() const { return violations == 0 && sandwich_failures == 0; }
};

/// Random exterior data on the given domain; verifies E_min subset of E_max
/// and (when the interior is small enough to enumerate) that every optimal
/// state is sandwiched between them.
MutualInclusionReport mutual_inclusion_check(const DomainMask& omega_template,
                                             const InteractionWeights& w, int trials,
                                             std::uint64_t seed);

struct RegularizationEntry {
  double epsilon = 0;
  GridSet minimizer;
  double energy_eps = 0;   // optimal energy under K_eps
  double energy_base = 0;  // P_{K,Omega}(E_eps) under the eps = 0 kernel
};
struct RegularizationSweep {
  std::vector<RegularizationEntry> entries;
  std::vector<std::vector<double>> pairwise_symdiff;
};

/// Minimizes with K_eps = K + eps |z|^{-n-1/2} for each eps (the list should
/// decrease to 0; eps == 0 reproduces the plain minimize).
RegularizationSweep regularization_sweep(const DomainMask& omega, const Kernel& base,
                                         const std::vector<double>& eps_list, int cutoff);

}  // namespace nlperim

#endif
