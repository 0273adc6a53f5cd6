#ifndef NLPERIM_KERNEL_HPP
#define NLPERIM_KERNEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nlperim/common.hpp"

namespace nlperim {

enum class KernelFamily {
  Fractional,             // |z|^{-n-s}
  AnisotropicFractional,  // a(z/|z|) |z|^{-n-s}
  Truncated,              // (9-|z|^2)_+^3 |z|^{-n-s}, compact support B_3
  Integrable,             // e^{9-|z|^2}
  Regularized             // base kernel + eps |z|^{-n-1/2}
};

enum class KStarVariant {
  ProportionalC1,            // K* = C1 K
  ProportionalPlusIndicator, // K* = C1 (K + chi_{|z|<R0}), R0 >= 2
  IntegrableKStar            // explicit integrable companion
};

/// Sampled positive even function on S^{n-1}.  n=2: uniform angular grid in
/// [0, 2pi); n=3: lat-long grid (theta in [0,pi], phi in [0,2pi)).  Linear
/// interpolation; evenness is enforced at construction by averaging
/// antipodal samples.
struct AngularTable {
  int dim = 2;
  int n_theta = 0;  // n=2: angular samples; n=3: latitude rows
  int n_phi = 0;    // n=3 only: longitude columns
  std::vector<double> values;

  bool empty() const { return values.empty(); }
  double eval_unit(const Vec& u) const;  // |u| == 1
  double min_value() const;
  double max_value() const;
  double mean_over_sphere() const;  // (1/|S^{n-1}|) * integral of a
};

AngularTable make_angular_table(int dim, const std::vector<double>& samples);

/// Interaction kernel with its companion kernel K*.  Immutable after
/// construction; evaluations are pure.
struct Kernel {
  KernelFamily family = KernelFamily::Fractional;
  int dim = 2;
  double s = 0.5;      // order (base kernel order for Regularized)
  double scale = 1.0;  // normalization enforcing K >= 1 on B_2
  double lambda = 0.0, Lambda = 0.0;  // L2 sandwich constants, power-law families
  AngularTable a;

  // Regularized only
  KernelFamily base_family = KernelFamily::Fractional;
  double epsilon = 0.0;

  KStarVariant kstar_variant = KStarVariant::ProportionalC1;
  double c1 = 0.0;
  double r0 = 0.0;      // indicator radius, ProportionalPlusIndicator
  double c1_eps = 0.0;  // companion constant for the epsilon part (Regularized)

  static constexpr double truncated_support = 3.0;

  double eval(const Vec& z) const;
  double eval(double zx, double zy, double zz = 0.0) const { return eval(Vec{zx, zy, zz}); }
  double kstar(const Vec& z) const;

  /// Radial profile f with K(z) = a(z/|z|) f(|z|) (a == 1 for isotropic
  /// families).  Includes the normalization scale and the epsilon part.
  double radial(double r) const;
  /// First/second radial derivatives of the profile (used to fix C1 and by
  /// the audit oracles in the tests).
  double radial_d1(double r) const;
  double radial_d2(double r) const;

  /// integral over {|z| > a} of the isotropic part of K (exact for power
  /// laws, quadrature otherwise); anisotropy enters via the angular mean.
  double integral_outside_ball(double a) const;
  /// integral over the complement of the centered box [-L, L]^n.
  double integral_outside_box(double L) const;

  bool compact_support() const { return family == KernelFamily::Truncated; }
  double support_radius() const;  // +inf when not compactly supported

  std::string to_json() const;
  static Kernel from_json(const std::string& text);

  int suggested_cutoff = 0;  // cells; CLI metadata carried through JSON
};

struct KernelParams {
  double s = 0.5;
  std::vector<double> a_samples;  // AnisotropicFractional
  double epsilon = 0.0;           // Regularized
  KernelFamily base_family = KernelFamily::Fractional;  // Regularized base
};

Kernel make_kernel(KernelFamily family, int dim, const KernelParams& params);

struct KStarAuditReport {
  double max_ratio = 0.0;       // max over samples of bound / K*(z)
  double max_first_ratio = 0.0;
  double max_second_ratio = 0.0;
  int samples = 0;
  bool pass(double tol = 0.05) const { return max_ratio <= 1.0 + tol; }
};

/// Estimates |z||d_e K| and |z|^2 sup_{|y-z|<=|z|/2} |d_ee K| by central
/// finite differences (step 1e-4 |z|, 16-point sup sample) at seeded sample
/// points, and reports the worst ratio against K*.  Diagnostic, not a gate.
KStarAuditReport kstar_audit(const Kernel& k, int sample_count, std::uint64_t seed);

struct IntegrabilityReport {
  double inside_b1 = 0.0;  // integral of K(z) |z| over B_1
  double tail = 0.0;       // integral of K over |z| > 1
  double total = 0.0;
  bool divergent = false;
};

/// integral of K(z) min{1, |z|}: adaptive dyadic radial quadrature inside
/// B_1, analytic tails for power laws.
IntegrabilityReport integrability_audit(const Kernel& k);

}  // namespace nlperim

#endif
