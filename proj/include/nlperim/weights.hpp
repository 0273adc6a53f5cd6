#ifndef NLPERIM_WEIGHTS_HPP
#define NLPERIM_WEIGHTS_HPP

#include <cstdint>
#include <vector>

#include "nlperim/common.hpp"
#include "nlperim/kernel.hpp"

namespace nlperim {

/// Cell-pair quadrature weights w(k) for integer offsets k != 0 with
/// |k|_inf <= cutoff.  w(k) approximates the double cell integral of K; the
/// midpoint rule K(hk) h^{2n} is used for |k|_inf >= 3 and a dyadically
/// refined tent quadrature for 1 <= |k|_inf <= 2.  Offset 0 never occurs
/// (a cell is wholly inside E or its complement).  Even by construction:
/// w(k) == w(-k) bit-exactly.
struct InteractionWeights {
  GridGeometry geom;  // world the stencil was sized for
  int cutoff = 0;     // |k|_inf support, cells
  int near_depth = 6;
  std::vector<double> w;  // (2c+1)^dim values, offset-indexed
  double total_weight = 0.0;
  Kernel kernel;
  bool from_kstar = false;

  double at(int kx, int ky, int kz = 0) const {
    int c = cutoff, n = 2 * c + 1;
    std::size_t idx = std::size_t(kx + c) + std::size_t(n) * std::size_t(ky + c);
    if (geom.dim == 3) idx += std::size_t(n) * std::size_t(n) * std::size_t(kz + c);
    return w[idx];
  }
  bool in_stencil(int kx, int ky, int kz = 0) const {
    return std::abs(kx) <= cutoff && std::abs(ky) <= cutoff && std::abs(kz) <= cutoff &&
           !(kx == 0 && ky == 0 && kz == 0);
  }
  /// analytic-or-quadrature integral of K outside the stencil box; used for
  /// whole-space tail corrections.
  double tail_integral() const { return kernel.integral_outside_box((cutoff + 0.5) * geom.h); }
};

/// Builds the stencil.  `use_kstar` evaluates the companion kernel K*
/// instead of K.  Throws when the stencil would exceed `budget_bytes`.
InteractionWeights build_weights(const Kernel& kernel, const GridGeometry& geom, int cutoff,
                                 bool use_kstar = false, int near_depth = 6,
                                 std::size_t budget_bytes = std::size_t(2) << 30,
                                 int threads = 0);

/// Single cell-pair weight at offset k, dyadic tent quadrature of the given
/// depth.  Exposed for the refinement-convergence checks.
double cell_pair_weight(const Kernel& kernel, double h, const Offset& k, int depth,
                        bool use_kstar = false);

}  // namespace nlperim

#endif
