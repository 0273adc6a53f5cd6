#include "nlperim/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace nlperim {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

double cutoff_phi(const Vec& x, double R) {
  double q = norm(x) / R;
  if (q < 0.5) return 1.0;
  if (q < 1.0) return 2.0 - 2.0 * q;
  return 0.0;
}

double cutoff_phi_log(const Vec& x, double R) {
  if (R < 4.0) throw std::invalid_argument("log cutoff needs R >= 4");
  double r = norm(x);
  if (r < std::sqrt(R)) return 1.0;
  if (r < R) return 2.0 - 2.0 * std::log(r) / std::log(R);
  return 0.0;
}

GridSet perturb(const GridSet& e, double R, double t, const Vec& v, PerturbVariant variant) {
  if (!(std::fabs(t) < 1.0)) throw std::invalid_argument("perturb needs |t| < 1");
  const auto& g = e.geom;
  auto phi = [&](const Vec& x) {
    return variant == PerturbVariant::Linear ? cutoff_phi(x, R) : cutoff_phi_log(x, R);
  };
  double inner = variant == PerturbVariant::Linear ? 0.5 * R : std::sqrt(R);

  auto sample = [&](const Vec& x) -> std::uint8_t {
    // invert Psi by fixed-point iteration; contraction factor <= 2|t|/R
    Vec y = x;
    for (int it = 0; it < 40; ++it) {
      double p = phi(y);
      Vec yn = {x[0] - t * p * v[0], x[1] - t * p * v[1], x[2] - t * p * v[2]};
      double d = norm(yn - y);
      y = yn;
      if (d < 1e-14) break;
    }
    int cx = int(std::lround((y[0] - g.origin[0]) / g.h));
    int cy = int(std::lround((y[1] - g.origin[1]) / g.h));
    int cz = g.dim == 3 ? int(std::lround((y[2] - g.origin[2]) / g.h)) : 0;
    if (!g.inside(cx, cy, cz)) return 0;
    return e.bits[g.index(cx, cy, cz)];
  };

  GridSet out(g);
  for (int z = 0; z < g.nz; ++z)
    for (int y = 0; y < g.ny; ++y)
      for (int x = 0; x < g.nx; ++x) {
        Vec c = g.center(x, y, z);
        double r = norm(c);
        auto idx = g.index(x, y, z);
        if (r >= R + std::fabs(t)) {  // identity region
          out.bits[idx] = e.bits[idx];
          continue;
        }
        if (r <= inner - std::fabs(t)) {  // pure translation region
          Vec yv = c - t * v;
          int cx = int(std::lround((yv[0] - g.origin[0]) / g.h));
          int cy = int(std::lround((yv[1] - g.origin[1]) / g.h));
          int cz = g.dim == 3 ? int(std::lround((yv[2] - g.origin[2]) / g.h)) : 0;
          out.bits[idx] = g.inside(cx, cy, cz) ? e.bits[g.index(cx, cy, cz)] : 0;
          continue;
        }
        // transition annulus: nearest-neighbor at 4x supersampling
        int votes = 0, total = 0;
        double q = 0.25 * g.h;
        if (g.dim == 2) {
          for (int sx = -1; sx <= 1; sx += 2)
            for (int sy = -1; sy <= 1; sy += 2) {
              votes += sample({c[0] + sx * q, c[1] + sy * q, 0.0});
              ++total;
            }
        } else {
          for (int sx = -1; sx <= 1; sx += 2)
            for (int sy = -1; sy <= 1; sy += 2)
              for (int sz = -1; sz <= 1; sz += 2) {
                votes += sample({c[0] + sx * q, c[1] + sy * q, c[2] + sz * q});
                ++total;
              }
        }
        if (2 * votes > total)
          out.bits[idx] = 1;
        else if (2 * votes < total)
          out.bits[idx] = 0;
        else
          out.bits[idx] = sample(c);
      }
  return out;
}

Lemma2ADefect lemma2a_defect(const GridSet& e, double R, double t, const Vec& v,
                             PerturbVariant variant, const InteractionWeights& w,
                             const InteractionWeights& w_star) {
  if (R < 4.0) throw std::invalid_argument("lemma needs R >= 4");
  const auto& g = e.geom;
  DomainMask ball_r = make_ball_domain(g, {0, 0, 0}, R, e);

  Lemma2ADefect out;
  if (t == 0.0) return out;

  GridSet ep = perturb(e, R, t, v, variant);
  GridSet em = perturb(e, R, -t, v, variant);
  double p0 = k_perimeter(e, ball_r, w).total;
  double pp = k_perimeter(ep, ball_r, w).total;
  double pm = k_perimeter(em, ball_r, w).total;
  out.lhs = pp + pm - 2.0 * p0;

  if (variant == PerturbVariant::Linear) {
    double pstar = k_perimeter(e, ball_r, w_star).total;
    out.rhs = 32.0 * t * t / (R * R) * pstar;
  } else {
    // sup over dyadic rho in [1, R], matching the paper's decomposition
    double sup = 0.0;
    for (double rho = 1.0;; rho *= 2.0) {
      double rr = std::min(rho, R);
      DomainMask ball_rho = make_ball_domain(g, {0, 0, 0}, rr, e);
      sup = std::max(sup, k_perimeter(e, ball_rho, w_star).total / (rr * rr));
      if (rr >= R) break;
    }
    double f = 32.0 * kPi * t;
    out.rhs = f * f / std::log(R) * sup;
  }
  out.defect = out.lhs - out.rhs;
  return out;
}

TranslationProductResult translation_product(const GridSet& e, const DomainMask& b1, const Vec& v,
                                             const std::vector<double>& t_list) {
  const auto& g = e.geom;
  TranslationProductResult res;
  auto measures = [&](double t) -> std::array<double, 2> {
    Offset k = {int(std::lround(t * v[0] / g.h)), int(std::lround(t * v[1] / g.h)),
                g.dim == 3 ? int(std::lround(t * v[2] / g.h)) : 0};
    GridSet sh = e.shifted(k);
    std::int64_t grow = 0, shrink = 0;
    for (std::size_t i = 0; i < e.bits.size(); ++i) {
      if (!b1.mask[i]) continue;
      grow += sh.bits[i] && !e.bits[i];
      shrink += e.bits[i] && !sh.bits[i];
    }
    double cm = g.cell_measure();
    return {double(grow) * cm, double(shrink) * cm};
  };
  for (double t : t_list) {
    if (t == 0.0) continue;
    auto pp = measures(t);
    auto pm = measures(-t);
    TranslationProductRow row;
    row.t = t;
    row.grow = pp[0];
    row.shrink = pp[1];
    row.value = std::min(pp[0] * pp[1], pm[0] * pm[1]) / (t * t);
    res.rows.push_back(row);
  }
  if (!res.rows.empty()) {
    auto it = std::min_element(
        res.rows.begin(), res.rows.end(),
        [](const auto& a, const auto& b) { return std::fabs(a.t) < std::fabs(b.t); });
    res.limit_estimate = it->value;
  }
  return res;
}

// ---------------------------------------------------------------------------
// flatness certificate

namespace {

std::vector<std::array<Vec, 3>> candidate_frames(int dim, int direction_samples) {
  std::vector<std::array<Vec, 3>> frames;
  if (dim == 2) {
    int m = std::max(4, direction_samples);
    for (int j = 0; j < m; ++j) {
      double th = kPi * j / m;
      Vec e1 = {std::cos(th), std::sin(th), 0.0};
      Vec e2 = {-std::sin(th), std::cos(th), 0.0};
      frames.push_back({e1, e2, e2});
    }
    return frames;
  }
  // n = 3: coordinate axes plus icosahedral axes for e_n, three in-plane
  // rotations of the horizontal pair
  std::vector<Vec> verts = {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}};
  double phi_g = (1.0 + std::sqrt(5.0)) / 2.0;
  double nrm = std::sqrt(1.0 + phi_g * phi_g);
  for (double sgn : {1.0, -1.0}) {
    verts.push_back(Vec{0, sgn / nrm, phi_g / nrm});
    verts.push_back(Vec{sgn / nrm, phi_g / nrm, 0});
    verts.push_back(Vec{phi_g / nrm, 0, sgn / nrm});
  }
  for (const auto& en : verts) {
    Vec axis = std::fabs(en[0]) <= std::fabs(en[1]) && std::fabs(en[0]) <= std::fabs(en[2])
                   ? Vec{1, 0, 0}
                   : (std::fabs(en[1]) <= std::fabs(en[2]) ? Vec{0, 1, 0} : Vec{0, 0, 1});
    Vec w1 = normalized(axis - dot(axis, en) * en);
    Vec w2 = {en[1] * w1[2] - en[2] * w1[1], en[2] * w1[0] - en[0] * w1[2],
              en[0] * w1[1] - en[1] * w1[0]};
    for (double rot : {0.0, kPi / 6.0, kPi / 3.0}) {
      Vec a = std::cos(rot) * w1 + std::sin(rot) * w2;
      Vec b = -1.0 * (std::sin(rot) * w1) + std::cos(rot) * w2;
      frames.push_back({a, b, en});
    }
  }
  return frames;
}

}  // namespace

FlatnessCertificate flatness_certificate(const GridSet& e, const DomainMask& b1,
                                         int direction_samples) {
  const auto& g = e.geom;
  const int dim = g.dim;
  FlatnessCertificate cert;

  // frame minimizing the horizontal variation
  double best_mu = std::numeric_limits<double>::infinity();
  std::array<Vec, 3> best{Vec{1, 0, 0}, Vec{0, 1, 0}, Vec{0, 0, 1}};
  for (auto& fr : candidate_frames(dim, direction_samples)) {
    double mu = 0.0;
    for (int i = 0; i < dim - 1; ++i) {
      auto dv = directional_variation(e, b1, fr[i]);
      mu = std::max(mu, std::max(dv.phi_plus, dv.phi_minus));
      if (mu >= best_mu) break;
    }
    if (mu < best_mu) {
      best_mu = mu;
      best = fr;
    }
  }
  cert.frame = best;
  cert.mu = best_mu;

  // orient e_n so vertical lines are mostly nonincreasing along +e_n, i.e.
  // up-jumps (0 -> 1, the phi_minus side here) are the rare side
  Vec en = cert.frame[2];
  auto dvn = directional_variation(e, b1, en);
  if (dvn.phi_minus > dvn.phi_plus) {
    en = {-en[0], -en[1], -en[2]};
    dvn = directional_variation(e, b1, en);
  }
  cert.frame[2] = en;
  if (dim == 2) cert.frame[1] = en;
  cert.vertical = dvn;

  // bad set: vertical lines with an up-jump; graph height elsewhere
  long long bad = 0;
  double gmin = 1e300, gmax = -1e300;
  for (const auto& L : dvn.lines) {
    cert.g_offsets.push_back(L.o1);
    if (L.i_minus > 0) {
      ++bad;
      cert.g_values.push_back(kNaN);
      continue;
    }
    double gv = L.has_one ? L.t_last_one + 0.5 * g.h : -1.0;
    gv = std::clamp(gv, -1.0, 1.0);
    cert.g_values.push_back(gv);
    gmin = std::min(gmin, gv);
    gmax = std::max(gmax, gv);
  }
  cert.bad_measure = double(bad) * dvn.cross_section;
  cert.osc_g = gmax >= gmin ? gmax - gmin : 0.0;

  // ordering thresholds from the horizontal scan (Step-1 argument): heights
  // of full-E and full-CE horizontal lines
  auto dvh = directional_variation(e, b1, cert.frame[0]);
  double t_lo = -1.0, t_hi = 1.0;
  bool any_lo = false, any_hi = false;
  for (const auto& L : dvh.lines) {
    if (L.samples == 0) continue;
    double height =
        dot(dvh.base, en) + g.h * (L.o1 * dot(dvh.w1, en) + L.o2 * dot(dvh.w2, en));
    bool constant = (L.i_plus + L.i_minus) == 0;
    if (constant && L.first == 1 && (!any_lo || height > t_lo)) {
      t_lo = height;
      any_lo = true;
    }
    if (constant && L.first == 0 && (!any_hi || height < t_hi)) {
      t_hi = height;
      any_hi = true;
    }
  }
  cert.t_lo = any_lo ? t_lo : -1.0;
  cert.t_hi = any_hi ? t_hi : 1.0;
  cert.t_star = std::clamp(0.5 * (cert.t_lo + cert.t_hi), -1.0, 1.0);

  cert.symdiff = halfspace_symdiff(e, b1, en, cert.t_star);
  cert.eps = std::max(cert.symdiff, cert.bad_measure);
  cert.measured_cn = cert.mu > 0 ? cert.eps / cert.mu : 0.0;

  // F3: vertical rescale by 1/eps stretches the horizontal-normal faces
  double horiz = 0.0;
  for (int i = 0; i < dim - 1; ++i) {
    auto dv = i == 0 ? dvh : directional_variation(e, b1, cert.frame[i]);
    horiz += dv.phi_plus + dv.phi_minus;
  }
  double vert = dvn.phi_plus + dvn.phi_minus;
  double eps_cl = std::max(cert.eps, 1e-12);
  cert.per_rescaled = horiz == 0.0 ? vert : horiz / eps_cl + vert;
  return cert;
}

}  // namespace nlperim
