#ifndef NLPERIM_GEOMETRY_HPP
#define NLPERIM_GEOMETRY_HPP

#include <cstdint>
#include <vector>

#include "nlperim/grid.hpp"

namespace nlperim {

/// Exact BV norm of the piecewise-constant indicator: h^{n-1} times the
/// number of faces between Omega cells whose values differ.
double classical_perimeter(const GridSet& e, const DomainMask& omega);

/// Per-line jump counts along one scan line (clipped to Omega).
struct LineVariation {
  int o1 = 0, o2 = 0;        // integer offsets of the line in the v-perp frame
  int i_plus = 0;            // 1 -> 0 transitions along +v
  int i_minus = 0;           // 0 -> 1 transitions along +v
  int samples = 0;           // in-Omega samples on the line
  std::uint8_t first = 0, last = 0;  // first/last in-Omega value along +v
  double t_first = 0, t_last = 0;    // v-coordinates of those samples
  double t_first_one = 0, t_last_one = 0;  // v-coordinates of first/last u==1
  bool has_one = false;
};

/// Directional variation of chi_E along v inside Omega.
///
/// Sign convention (fixed here once): Phi_plus(v) counts 1 -> 0 transitions
/// walking along +v, Phi_minus counts 0 -> 1, each weighted by the line
/// cross-section h^{n-1}.  With this convention Phi_pm(-v) == Phi_mp(v)
/// bit-exactly.  Axis directions are exact; oblique directions use rays
/// through cell centers with spacing h (O(h) biased).
struct DirectionalVariation {
  Vec v{1, 0, 0};
  double phi_plus = 0, phi_minus = 0;
  double cross_section = 0;   // h^{n-1}
  double bad_measure = 0;     // measure of lines meeting the jump set
  std::vector<LineVariation> lines;
  // line (o1,o2) passes through base + h*(o1*w1 + o2*w2)
  Vec base{0, 0, 0}, w1{0, 0, 0}, w2{0, 0, 0};
};

DirectionalVariation directional_variation(const GridSet& e, const DomainMask& omega,
                                           const Vec& v);

struct CroftonEstimate {
  double estimate = 0;
  double stderr_ = 0;
  std::int64_t lines = 0;
  double mean_count = 0;
};

/// Monte Carlo Cauchy-Crofton estimate of the perimeter of the rasterized
/// set inside Omega.  Lines are walked cell-by-cell (exact face crossings),
/// so the estimator is unbiased for classical_perimeter up to the finite
/// line count.
CroftonEstimate crofton_perimeter(const GridSet& e, const DomainMask& omega,
                                  std::int64_t line_count, std::uint64_t seed);

double symmetric_difference_measure(const GridSet& e, const GridSet& f, const DomainMask& omega);

struct HalfspaceFit {
  Vec v{0, 0, 0};
  double t = 0;
  double symdiff = 0;  // measure of (E triangle {x.v <= t}) within Omega
};

/// Scans sampled directions (always including the axes) and all distinct
/// center projections as thresholds; exhaustive in t for each v.
HalfspaceFit best_halfspace_fit(const GridSet& e, const DomainMask& omega, int direction_samples);

/// Measure of (E triangle {x.v <= t}) within Omega for a given halfspace.
double halfspace_symdiff(const GridSet& e, const DomainMask& omega, const Vec& v, double t);

}  // namespace nlperim

#endif
