#ifndef NLPERIM_STABILITY_HPP
#define NLPERIM_STABILITY_HPP

#include <array>
#include <vector>

#include "nlperim/energy.hpp"
#include "nlperim/geometry.hpp"
#include "nlperim/grid.hpp"

namespace nlperim {

/// Radial cutoff 2 - 2|x|/R on the annulus R/2 <= |x| < R, 1 inside, 0 outside.
double cutoff_phi(const Vec& x, double R);
/// Logarithmic cutoff 2 - 2 log|x| / log R between sqrt(R) and R; needs R >= 4.
double cutoff_phi_log(const Vec& x, double R);

enum class PerturbVariant { Linear, Log };

/// E_{R,t} = Psi_{R,t}(E) with Psi(x) = x + t phi_R(x) v, realized by
/// resampling u(Psi^{-1}(x)) at cell centers (4x supersampling in the
/// transition annulus).  For t a multiple of h and axis v the core region
/// B_{R/2} is an exact cell shift.
GridSet perturb(const GridSet& e, double R, double t, const Vec& v, PerturbVariant variant);

struct Lemma2ADefect {
  double lhs = 0;   // P(E_{R,t}) + P(E_{R,-t}) - 2 P(E), all P_{K,B_R}
  double rhs = 0;   // 32 t^2/R^2 P_{K*,B_R}(E)  (linear)  or the log-variant bound
  double defect = 0;  // lhs - rhs; <= discretization slack when the lemma holds
};

Lemma2ADefect lemma2a_defect(const GridSet& e, double R, double t, const Vec& v,
                             PerturbVariant variant, const InteractionWeights& w,
                             const InteractionWeights& w_star);

struct TranslationProductRow {
  double t = 0;
  double grow = 0, shrink = 0;  // |(E+tv)\E cap B1|, |E\(E+tv) cap B1|
  double value = 0;             // min over +-t of grow*shrink/t^2
};
struct TranslationProductResult {
  std::vector<TranslationProductRow> rows;
  double limit_estimate = 0;  // value at the smallest |t|
};

/// Quadratic translation products of Lemma-of-intermediate type; t must be
/// (near) multiples of h, shifts are rounded to the lattice.
TranslationProductResult translation_product(const GridSet& e, const DomainMask& b1, const Vec& v,
                                             const std::vector<double>& t_list);

/// Quantitative flatness data for E in the unit ball: frame, Phi tables,
/// bad set, graph function, and the three headline numbers (symmetric
/// difference to the fitted halfspace, bad-set measure, rescaled perimeter).
struct FlatnessCertificate {
  std::array<Vec, 3> frame;  // horizontal direction(s) first, vertical last
  double mu = 0;             // max over horizontal dirs of max{Phi+, Phi-}
  double t_star = 0, t_lo = -1, t_hi = 1;
  double bad_measure = 0;
  double osc_g = 0;
  double eps = 0;          // reported epsilon: max(symdiff, bad measure)
  double measured_cn = 0;  // eps / mu when mu > 0
  double symdiff = 0;      // |(E triangle {x.e_n <= t*}) cap B1|
  double per_rescaled = 0; // F3 quantity at the reported epsilon
  std::vector<int> g_offsets;    // section index per vertical line
  std::vector<double> g_values;  // graph height per line (NaN on the bad set)
  DirectionalVariation vertical; // line-level data along the chosen e_n
};

FlatnessCertificate flatness_certificate(const GridSet& e, const DomainMask& b1,
                                         int direction_samples);

}  // namespace nlperim

#endif
