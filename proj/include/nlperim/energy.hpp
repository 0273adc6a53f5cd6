#ifndef NLPERIM_ENERGY_HPP
#define NLPERIM_ENERGY_HPP

#include <string>
#include <vector>

#include "nlperim/grid.hpp"
#include "nlperim/weights.hpp"

namespace nlperim {

/// Decomposed K-perimeter inside Omega (truncated-world semantics: pairs
/// beyond the world box are dropped; the result is itself the K-perimeter of
/// a truncated kernel, so the exact identities stay exact).
struct EnergyReport {
  double term_in_in = 0;   // L_K(E cap Omega, CE cap Omega)
  double term_in_out = 0;  // L_K(E cap Omega, CE minus Omega)
  double term_out_in = 0;  // L_K(E minus Omega, CE cap Omega)
  double total = 0;
  double classical_perimeter = 0;
  double tail_bound = 0;  // |Omega| * integral_{|z| > cutoff h} K

  std::string csv_row(const std::string& set_id, const std::string& kernel_id, double R) const;
  static std::string csv_header();
};

enum class InteractionMethod { Auto, Direct, Convolution };

/// sum_{a in A, b in B} w(b - a); A and B must be disjoint.
double interaction(const std::vector<std::uint8_t>& a_mask, const std::vector<std::uint8_t>& b_mask,
                   const InteractionWeights& w, InteractionMethod method = InteractionMethod::Auto);

/// out(a) = sum_k w(k) field(a + k), zero outside the world.  Direct stencil
/// sweep for small problems, zero-padded FFT otherwise.
std::vector<double> convolve_stencil(const std::vector<double>& field, const InteractionWeights& w,
                                     InteractionMethod method = InteractionMethod::Auto);

EnergyReport k_perimeter(const GridSet& e, const DomainMask& omega, const InteractionWeights& w);

/// Whole-space K-perimeter of B_R rasterized on a centered world of
/// `resolution` cells per side (world box side 2.5 R), with analytic tail
/// correction beyond the stencil box.
double pk_ball(const Kernel& kernel, double R, int resolution, int cutoff = 0);

/// P(EuF) + P(EnF) + 2 L_K(F\E, E\F) - P(E) - P(F); identically zero in
/// exact arithmetic for any pair of sets.
double submodularity_defect(const GridSet& e, const GridSet& f, const DomainMask& omega,
                            const InteractionWeights& w);

struct CoareaResult {
  double functional = 0;  // F_{K,Omega}(u)
  double level_sum = 0;   // finite sum for the t-integral of P_{K,Omega}({u>t})
};
CoareaResult coarea(const Field& u, const DomainMask& omega, const InteractionWeights& w);

struct InterpolationReport {
  double ptilde = 0;  // in-in fractional term
  double per = 0;     // classical perimeter in Omega
  double ratio = 0;
  bool flagged = false;  // Per == 0
};
InterpolationReport interpolation_check(const GridSet& e, const DomainMask& omega, double s,
                                        int cutoff = 0);

/// slack = P_K(B_R) - P_{K,B_R}(E_min), both in the same truncated-world
/// functional; nonnegative whenever E_min is optimal.
double minimizer_energy_bound_check(const GridSet& e_min, const DomainMask& omega,
                                    const InteractionWeights& w);

}  // namespace nlperim

#endif
