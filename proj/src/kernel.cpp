#include "nlperim/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"

namespace nlperim {

namespace {

constexpr double kPi = std::numbers::pi;

double surface_measure(int dim) { return dim == 2 ? 2.0 * kPi : 4.0 * kPi; }

// Composite Simpson on [a,b], integrand smooth there; panels must be even.
template <class F>
double simpson(F f, double a, double b, int panels = 64) {
  double s = f(a) + f(b);
  double dx = (b - a) / panels;
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * dx);
  return s * dx / 3.0;
}

// integral over [a,b] split dyadically toward a=0 endpoint.
template <class F>
double dyadic_integral(F f, double b, int levels = 48) {
  double total = 0.0;
  double hi = b;
  for (int j = 0; j < levels; ++j) {
    double lo = hi * 0.5;
    total += simpson(f, lo, hi, 64);
    hi = lo;
  }
  return total;
}

}  // namespace

// ---------------------------------------------------------------------------
// AngularTable

AngularTable make_angular_table(int dim, const std::vector<double>& samples) {
  AngularTable t;
  t.dim = dim;
  if (dim == 2) {
    if (samples.size() < 8 || samples.size() % 2 != 0)
      throw std::invalid_argument("a_table: need an even sample count >= 8");
    t.n_theta = int(samples.size());
    t.values = samples;
    int half = t.n_theta / 2;
    double vmax = *std::max_element(samples.begin(), samples.end());
    for (int i = 0; i < half; ++i) {
      double d = std::fabs(samples[i] - samples[i + half]);
      if (d > 1e-12 * std::max(1.0, vmax))
        throw std::invalid_argument("a_table: even-symmetry violation beyond 1e-12");
      double avg = 0.5 * (samples[i] + samples[i + half]);
      t.values[i] = t.values[i + half] = avg;
    }
  } else {
    t.n_theta = 32;
    t.n_phi = 64;
    if (samples.size() != size_t(t.n_theta) * t.n_phi)
      throw std::invalid_argument("a_table: 3d table must be 32x64 lat-long");
    t.values = samples;
    for (int i = 0; i < t.n_theta; ++i)
      for (int j = 0; j < t.n_phi; ++j) {
        int ia = t.n_theta - 1 - i, ja = (j + t.n_phi / 2) % t.n_phi;
        double v = samples[i * t.n_phi + j], va = samples[ia * t.n_phi + ja];
        if (std::fabs(v - va) > 1e-12 * std::max(1.0, std::fabs(v)))
          throw std::invalid_argument("a_table: even-symmetry violation beyond 1e-12");
        t.values[i * t.n_phi + j] = 0.5 * (v + va);
      }
  }
  for (double v : t.values)
    if (!(v > 0.0)) throw std::invalid_argument("a_table: nonpositive entry");
  return t;
}

double AngularTable::eval_unit(const Vec& uin) const {
  if (empty()) return 1.0;
  // canonical hemisphere: a is even and antipodal table entries are equal,
  // so flipping the sign first makes eval(+u) and eval(-u) bit-identical
  Vec u = uin;
  bool flip = u[2] < 0 || (u[2] == 0 && (u[1] < 0 || (u[1] == 0 && u[0] < 0)));
  if (flip) u = {-u[0], -u[1], -u[2]};
  if (dim == 2) {
    double th = std::atan2(u[1], u[0]);
    if (th < 0) th += 2.0 * kPi;
    double x = th * n_theta / (2.0 * kPi);
    int i0 = int(x) % n_theta;
    int i1 = (i0 + 1) % n_theta;
    double f = x - std::floor(x);
    return (1.0 - f) * values[i0] + f * values[i1];
  }
  double th = std::acos(std::clamp(u[2], -1.0, 1.0));
  double ph = std::atan2(u[1], u[0]);
  if (ph < 0) ph += 2.0 * kPi;
  double xi = th / kPi * n_theta - 0.5;
  double xj = ph / (2.0 * kPi) * n_phi;
  int i0 = int(std::floor(xi)), j0 = int(std::floor(xj)) % n_phi;
  double fi = xi - std::floor(xi), fj = xj - std::floor(xj);
  int i1 = std::min(i0 + 1, n_theta - 1);
  i0 = std::max(i0, 0);
  int j1 = (j0 + 1) % n_phi;
  auto at = [&](int i, int j) { return values[i * n_phi + j]; };
  return (1 - fi) * ((1 - fj) * at(i0, j0) + fj * at(i0, j1)) +
         fi * ((1 - fj) * at(i1, j0) + fj * at(i1, j1));
}

double AngularTable::min_value() const {
  return empty() ? 1.0 : *std::min_element(values.begin(), values.end());
}
double AngularTable::max_value() const {
  return empty() ? 1.0 : *std::max_element(values.begin(), values.end());
}

double AngularTable::mean_over_sphere() const {
  if (empty()) return 1.0;
  if (dim == 2) {
    double s = 0;
    for (double v : values) s += v;
    return s / values.size();
  }
  double num = 0, den = 0;
  for (int i = 0; i < n_theta; ++i) {
    double th = kPi * (i + 0.5) / n_theta, w = std::sin(th);
    for (int j = 0; j < n_phi; ++j) {
      num += w * values[i * n_phi + j];
      den += w;
    }
  }
  return num / den;
}

// ---------------------------------------------------------------------------
// Kernel profiles

namespace {

// un-normalized radial profile of a family (a == 1 direction)
double base_profile(KernelFamily fam, int dim, double s, double r) {
  double p = dim + s;
  switch (fam) {
    case KernelFamily::Fractional:
    case KernelFamily::AnisotropicFractional:
      return std::pow(r, -p);
    case KernelFamily::Truncated: {
      double g = 9.0 - r * r;
      return g > 0 ? g * g * g * std::pow(r, -p) : 0.0;
    }
    case KernelFamily::Integrable:
      return std::exp(9.0 - r * r);
    default:
      return 0.0;
  }
}

double base_profile_d1(KernelFamily fam, int dim, double s, double r) {
  double p = dim + s;
  switch (fam) {
    case KernelFamily::Fractional:
    case KernelFamily::AnisotropicFractional:
      return -p * std::pow(r, -p - 1.0);
    case KernelFamily::Truncated: {
      double g = 9.0 - r * r;
      if (g <= 0) return 0.0;
      double gp = -6.0 * r * g * g;
      return gp * std::pow(r, -p) - p * g * g * g * std::pow(r, -p - 1.0);
    }
    case KernelFamily::Integrable:
      return -2.0 * r * std::exp(9.0 - r * r);
    default:
      return 0.0;
  }
}

double base_profile_d2(KernelFamily fam, int dim, double s, double r) {
  double p = dim + s;
  switch (fam) {
    case KernelFamily::Fractional:
    case KernelFamily::AnisotropicFractional:
      return p * (p + 1.0) * std::pow(r, -p - 2.0);
    case KernelFamily::Truncated: {
      double g = 9.0 - r * r;
      if (g <= 0) return 0.0;
      double gp = -6.0 * r * g * g;
      double gpp = -6.0 * g * g + 24.0 * r * r * g;
      return gpp * std::pow(r, -p) - 2.0 * p * gp * std::pow(r, -p - 1.0) +
             p * (p + 1.0) * g * g * g * std::pow(r, -p - 2.0);
    }
    case KernelFamily::Integrable:
      return (4.0 * r * r - 2.0) * std::exp(9.0 - r * r);
    default:
      return 0.0;
  }
}

// infimum of the un-normalized isotropic profile over B_2 \ {0}; every family
// here is radially decreasing, so the infimum sits at r = 2.
double inf_b2(KernelFamily fam, int dim, double s) {
  return base_profile(fam, dim, s, 2.0);
}

}  // namespace

double Kernel::support_radius() const {
  return compact_support() ? truncated_support : std::numeric_limits<double>::infinity();
}

double Kernel::radial(double r) const {
  if (!(r > 0)) return std::numeric_limits<double>::infinity();
  KernelFamily fam = family == KernelFamily::Regularized ? base_family : family;
  double v = scale * base_profile(fam, dim, s, r);
  if (family == KernelFamily::Regularized) v += epsilon * std::pow(r, -(dim + 0.5));
  return v;
}

double Kernel::radial_d1(double r) const {
  KernelFamily fam = family == KernelFamily::Regularized ? base_family : family;
  double v = scale * base_profile_d1(fam, dim, s, r);
  if (family == KernelFamily::Regularized)
    v += -(dim + 0.5) * epsilon * std::pow(r, -(dim + 1.5));
  return v;
}

double Kernel::radial_d2(double r) const {
  KernelFamily fam = family == KernelFamily::Regularized ? base_family : family;
  double v = scale * base_profile_d2(fam, dim, s, r);
  if (family == KernelFamily::Regularized)
    v += (dim + 0.5) * (dim + 1.5) * epsilon * std::pow(r, -(dim + 2.5));
  return v;
}

double Kernel::eval(const Vec& z) const {
  double r = norm(z);
  if (!(r > 0)) return std::numeric_limits<double>::infinity();
  KernelFamily fam = family == KernelFamily::Regularized ? base_family : family;
  double v = scale * base_profile(fam, dim, s, r);
  if (!a.empty()) v *= a.eval_unit({z[0] / r, z[1] / r, z[2] / r});
  if (family == KernelFamily::Regularized) v += epsilon * std::pow(r, -(dim + 0.5));
  return v;
}

double Kernel::kstar(const Vec& z) const {
  double r = norm(z);
  switch (kstar_variant) {
    case KStarVariant::ProportionalC1:
      return c1 * eval(z);
    case KStarVariant::ProportionalPlusIndicator:
      return c1 * (eval(z) + (r < r0 ? 1.0 : 0.0));
    case KStarVariant::IntegrableKStar: {
      // symbolic derivative bound for e^{9-r^2}: see tests for the oracle
      double v = scale * r * r * (2.0 + 9.0 * r * r) * std::exp(9.0 - 0.25 * r * r);
      if (family == KernelFamily::Regularized)
        v += c1_eps * epsilon * std::pow(r, -(dim + 0.5));
      return v;
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Construction

Kernel make_kernel(KernelFamily family, int dim, const KernelParams& params) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("dim must be 2 or 3");
  Kernel k;
  k.family = family;
  k.dim = dim;
  k.s = params.s;
  k.epsilon = params.epsilon;
  k.base_family = params.base_family;

  KernelFamily fam = family == KernelFamily::Regularized ? params.base_family : family;
  if (family == KernelFamily::Regularized) {
    if (!(params.epsilon > 0)) throw std::invalid_argument("regularized kernel needs eps > 0");
    if (params.base_family == KernelFamily::Regularized)
      throw std::invalid_argument("regularized base must be a plain family");
  }
  bool needs_s = fam == KernelFamily::Fractional || fam == KernelFamily::AnisotropicFractional ||
                 fam == KernelFamily::Truncated;
  if (needs_s && !(params.s > 0.0 && params.s < 1.0))
    throw std::invalid_argument("order s must lie in (0,1)");

  if (fam == KernelFamily::AnisotropicFractional) {
    if (params.a_samples.empty())
      throw std::invalid_argument("anisotropic kernel needs a_table samples");
    k.a = make_angular_table(dim, params.a_samples);
  }

  double amin = k.a.min_value(), amax = k.a.max_value();
  double inf = inf_b2(fam, dim, params.s) * amin;
  k.scale = std::max(1.0, 1.0 / inf);

  double p = dim + params.s;
  if (fam == KernelFamily::Fractional || fam == KernelFamily::AnisotropicFractional) {
    k.lambda = k.scale * amin;
    k.Lambda = k.scale * amax;
  }

  // companion kernel
  double c1_iso = p * (p + 1.0) * std::pow(2.0, p + 2.0);
  switch (fam) {
    case KernelFamily::Fractional:
      k.kstar_variant = KStarVariant::ProportionalC1;
      k.c1 = c1_iso;
      break;
    case KernelFamily::AnisotropicFractional: {
      // roughness of the sampled a enters the derivative bounds
      double l1 = 0, l2 = 0;
      const auto& v = k.a.values;
      if (dim == 2) {
        int n = k.a.n_theta;
        double dth = 2.0 * kPi / n;
        for (int i = 0; i < n; ++i) {
          double d1 = (v[(i + 1) % n] - v[i]) / dth;
          double d2 = (v[(i + 1) % n] - 2 * v[i] + v[(i + n - 1) % n]) / (dth * dth);
          l1 = std::max(l1, std::fabs(d1));
          l2 = std::max(l2, std::fabs(d2));
        }
      } else {
        int nt = k.a.n_theta, np = k.a.n_phi;
        double dth = kPi / nt;
        for (int i = 1; i + 1 < nt; ++i)
          for (int j = 0; j < np; ++j) {
            auto at = [&](int ii, int jj) { return v[ii * np + ((jj % np) + np) % np]; };
            l1 = std::max({l1, std::fabs(at(i + 1, j) - at(i, j)) / dth,
                           std::fabs(at(i, j + 1) - at(i, j)) / dth});
            l2 = std::max({l2, std::fabs(at(i + 1, j) - 2 * at(i, j) + at(i - 1, j)) / (dth * dth),
                           std::fabs(at(i, j + 1) - 2 * at(i, j) + at(i, j - 1)) / (dth * dth)});
          }
      }
      k.kstar_variant = KStarVariant::ProportionalC1;
      k.c1 = std::pow(2.0, p + 2.0) *
             (p * (p + 1.0) * amax + (2.0 * p + 1.0) * l1 + l2) / amin;
      break;
    }
    case KernelFamily::Truncated: {
      k.kstar_variant = KStarVariant::ProportionalPlusIndicator;
      k.r0 = 2.0 * Kernel::truncated_support;
      // numeric sweep of the symbolic radial derivative bounds
      Kernel probe = k;  // scale already set; c1 not used by radial()
      double worst = 0.0;
      for (int i = 0; i <= 4000; ++i) {
        double r = std::pow(10.0, -3.0 + 4.0 * i / 4000.0);  // up to 10
        if (r > 2.0 * Kernel::truncated_support) break;
        double first = r * std::fabs(probe.radial_d1(r));
        double sup2 = 0.0;
        for (int m = 0; m <= 64; ++m) {
          double rho = 0.5 * r + r * m / 64.0;
          sup2 = std::max(sup2, std::max(std::fabs(probe.radial_d2(rho)),
                                         std::fabs(probe.radial_d1(rho)) / rho));
        }
        double bound = std::max(first, r * r * sup2);
        double denom = probe.radial(r) + (r < k.r0 ? 1.0 : 0.0);
        worst = std::max(worst, bound / denom);
      }
      k.c1 = 1.25 * worst;
      break;
    }
    case KernelFamily::Integrable:
      k.kstar_variant = KStarVariant::IntegrableKStar;
      break;
    default:
      break;
  }
  if (family == KernelFamily::Regularized) {
    double q = dim + 0.5;
    k.c1_eps = q * (q + 1.0) * std::pow(2.0, q + 2.0);
    if (k.kstar_variant != KStarVariant::IntegrableKStar) k.c1 = std::max(k.c1, k.c1_eps);
  }
  return k;
}

// ---------------------------------------------------------------------------
// Tail integrals

namespace {

// integral_{a}^{inf} f(r) r^{dim-1} dr for the isotropic base part (with scale)
double base_radial_tail(const Kernel& k, double a) {
  KernelFamily fam = k.family == KernelFamily::Regularized ? k.base_family : k.family;
  double p = k.dim + k.s;
  switch (fam) {
    case KernelFamily::Fractional:
    case KernelFamily::AnisotropicFractional:
      return k.scale * std::pow(a, -k.s) / k.s;
    case KernelFamily::Truncated: {
      double sup = Kernel::truncated_support;
      if (a >= sup) return 0.0;
      auto f = [&](double r) {
        double g = 9.0 - r * r;
        return k.scale * g * g * g * std::pow(r, -p) * std::pow(r, k.dim - 1.0);
      };
      return simpson(f, a, sup, 256);
    }
    case KernelFamily::Integrable: {
      if (k.dim == 2) return k.scale * 0.5 * std::exp(9.0 - a * a);
      return k.scale * (0.5 * a * std::exp(9.0 - a * a) +
                        0.25 * std::sqrt(kPi) * std::exp(9.0) * std::erfc(a));
    }
    default:
      return 0.0;
  }
}

double eps_radial_tail(const Kernel& k, double a) {
  if (k.family != KernelFamily::Regularized) return 0.0;
  // integral_a^inf r^{-(dim+1/2)} r^{dim-1} dr = 2 a^{-1/2}
  return k.epsilon * 2.0 / std::sqrt(a);
}

}  // namespace

double Kernel::integral_outside_ball(double rad) const {
  double surf = surface_measure(dim);
  return surf * (a.mean_over_sphere() * base_radial_tail(*this, rad) +
                 eps_radial_tail(*this, rad));
}

double Kernel::integral_outside_box(double L) const {
  if (compact_support() && L >= support_radius() && family != KernelFamily::Regularized)
    return 0.0;
  if (dim == 2) {
    int m = 2048;
    double sum = 0.0, dth = 2.0 * kPi / m;
    for (int i = 0; i < m; ++i) {
      double th = (i + 0.5) * dth;
      double c = std::max(std::fabs(std::cos(th)), std::fabs(std::sin(th)));
      double rb = L / c;
      double av = a.empty() ? 1.0 : a.eval_unit({std::cos(th), std::sin(th), 0.0});
      sum += dth * (av * base_radial_tail(*this, rb) + eps_radial_tail(*this, rb));
    }
    return sum;
  }
  int nt = 96, np = 192;
  double sum = 0.0;
  for (int i = 0; i < nt; ++i) {
    double th = kPi * (i + 0.5) / nt, w = std::sin(th) * (kPi / nt) * (2.0 * kPi / np);
    for (int j = 0; j < np; ++j) {
      double ph = 2.0 * kPi * (j + 0.5) / np;
      Vec u = {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
      double c = std::max({std::fabs(u[0]), std::fabs(u[1]), std::fabs(u[2])});
      double rb = L / c;
      double av = a.empty() ? 1.0 : a.eval_unit(u);
      sum += w * (av * base_radial_tail(*this, rb) + eps_radial_tail(*this, rb));
    }
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Audits

KStarAuditReport kstar_audit(const Kernel& k, int sample_count, std::uint64_t seed) {
  KStarAuditReport rep;
  rep.samples = sample_count;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double rmax = k.compact_support() ? 2.0 * k.support_radius() : 5.0;

  auto rand_unit = [&]() -> Vec {
    while (true) {
      Vec v = {2 * uni(rng) - 1, 2 * uni(rng) - 1, k.dim == 3 ? 2 * uni(rng) - 1 : 0.0};
      double n = norm(v);
      if (n > 1e-3 && n <= 1.0) return {v[0] / n, v[1] / n, v[2] / n};
    }
  };

  for (int i = 0; i < sample_count; ++i) {
    double r = 0.05 * std::pow(rmax / 0.05, uni(rng));  // log-uniform
    Vec zu = rand_unit();
    Vec z = r * zu;
    Vec e = rand_unit();
    double eta = 1e-4 * r;
    auto kv = [&](const Vec& y) { return k.eval(y); };
    double first = r * std::fabs(kv(z + eta * e) - kv(z - eta * e)) / (2 * eta);

    double sup2 = 0.0;
    for (int m = 0; m < 16; ++m) {
      Vec y = m == 0 ? z : z + (0.5 * r * uni(rng)) * rand_unit();
      double ry = norm(y);
      if (!(ry > 0)) continue;
      double ey = 1e-4 * ry;
      double d2 = std::fabs(kv(y + ey * e) - 2.0 * kv(y) + kv(y - ey * e)) / (ey * ey);
      sup2 = std::max(sup2, d2);
    }
    double second = r * r * sup2;
    double ks = k.kstar(z);
    if (!(ks > 0)) continue;
    rep.max_first_ratio = std::max(rep.max_first_ratio, first / ks);
    rep.max_second_ratio = std::max(rep.max_second_ratio, second / ks);
  }
  rep.max_ratio = std::max(rep.max_first_ratio, rep.max_second_ratio);
  return rep;
}

IntegrabilityReport integrability_audit(const Kernel& k) {
  IntegrabilityReport rep;
  double surf = surface_measure(k.dim);
  double amean = k.a.mean_over_sphere();

  // r^dim * f_base(r) over (0,1], dyadic toward the singularity, plus the
  // analytic remainder below 2^-48 for the power-law families
  KernelFamily fam = k.family == KernelFamily::Regularized ? k.base_family : k.family;
  auto gb = [&](double r) {
    return std::pow(r, double(k.dim)) * k.scale * base_profile(fam, k.dim, k.s, r);
  };
  double inside_base = dyadic_integral(gb, 1.0, 48);
  double r_small = std::pow(0.5, 48);
  if (fam != KernelFamily::Integrable) {
    // near 0 the profile is ~ scale * (729 or 1) * r^{-dim-s}
    double c0 = fam == KernelFamily::Truncated ? 729.0 : 1.0;
    inside_base += k.scale * c0 * std::pow(r_small, 1.0 - k.s) / (1.0 - k.s);
  }
  double inside_eps = 0.0;
  if (k.family == KernelFamily::Regularized)
    inside_eps = k.epsilon * 2.0;  // integral_0^1 r^{dim} r^{-dim-1/2} dr = 2
  rep.inside_b1 = surf * (amean * inside_base + inside_eps);
  rep.tail = k.integral_outside_ball(1.0);
  rep.total = rep.inside_b1 + rep.tail;
  rep.divergent = !std::isfinite(rep.total);
  return rep;
}

// ---------------------------------------------------------------------------
// JSON round trip

namespace {
std::string family_name(KernelFamily f) {
  switch (f) {
    case KernelFamily::Fractional: return "fractional";
    case KernelFamily::AnisotropicFractional: return "anisotropic";
    case KernelFamily::Truncated: return "truncated";
    case KernelFamily::Integrable: return "integrable";
    case KernelFamily::Regularized: return "regularized";
  }
  return "?";
}
KernelFamily family_from(const std::string& n) {
  if (n == "fractional") return KernelFamily::Fractional;
  if (n == "anisotropic") return KernelFamily::AnisotropicFractional;
  if (n == "truncated") return KernelFamily::Truncated;
  if (n == "integrable") return KernelFamily::Integrable;
  if (n == "regularized") return KernelFamily::Regularized;
  throw std::invalid_argument("unknown kernel family: " + n);
}
}  // namespace

std::string Kernel::to_json() const {
  nlohmann::json j;
  j["family"] = family_name(family);
  if (family == KernelFamily::Regularized) j["base"] = family_name(base_family);
  j["dim"] = dim;
  j["s"] = s;
  j["epsilon"] = epsilon;
  j["r0"] = r0;
  j["c1"] = c1;
  j["cutoff"] = suggested_cutoff;
  j["a_table"] = a.values;
  return j.dump(2);
}

Kernel Kernel::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  KernelParams p;
  KernelFamily fam = family_from(j.at("family").get<std::string>());
  p.s = j.value("s", 0.5);
  p.epsilon = j.value("epsilon", 0.0);
  if (j.contains("base")) p.base_family = family_from(j["base"].get<std::string>());
  if (j.contains("a_table")) p.a_samples = j["a_table"].get<std::vector<double>>();
  Kernel k = make_kernel(fam, j.value("dim", 2), p);
  if (j.contains("c1") && j["c1"].get<double>() > 0) k.c1 = j["c1"].get<double>();
  if (j.contains("r0") && j["r0"].get<double>() > 0) k.r0 = j["r0"].get<double>();
  k.suggested_cutoff = j.value("cutoff", 0);
  return k;
}

}  // namespace nlperim
