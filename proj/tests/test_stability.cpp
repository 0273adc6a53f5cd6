#include "nlperim/stability.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "nlperim/mincut.hpp"

using namespace nlperim;

namespace {
InteractionWeights frac_weights(const GridGeometry& g, int cutoff, bool kstar = false) {
  Kernel k = make_kernel(KernelFamily::Fractional, g.dim, {.s = 0.5});
  return build_weights(k, g, cutoff, kstar);
}

GridSet blobs(const GridGeometry& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  GridSet s = rasterize_halfplane(g, {0, 1, 0}, 0.0);
  double half = 0.4 * g.h * g.nx;
  for (int b = 0; b < 5; ++b) {
    Vec c = {uni(rng) * half, uni(rng) * half, 0};
    double r = 1.0 + std::fabs(uni(rng)) * 2.0;
    GridSet ball = rasterize_ball(g, c, r);
    if (b % 2 == 0)
      for (std::size_t i = 0; i < s.bits.size(); ++i) s.bits[i] |= ball.bits[i];
    else
      for (std::size_t i = 0; i < s.bits.size(); ++i) s.bits[i] &= !ball.bits[i];
  }
  return s;
}
}  // namespace

TEST_CASE("cutoff profiles match their defining formulas") {
  double R = 8.0;
  CHECK(cutoff_phi({R / 2 - 1e-9, 0, 0}, R) == 1.0);
  CHECK(cutoff_phi({R / 2, 0, 0}, R) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cutoff_phi({0.75 * R, 0, 0}, R) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(cutoff_phi({R, 0, 0}, R) == 0.0);
  CHECK(cutoff_phi({1.5 * R, 0, 0}, R) == 0.0);

  double Rl = 16.0;
  CHECK(cutoff_phi_log({std::sqrt(Rl) - 1e-9, 0, 0}, Rl) == 1.0);
  CHECK(cutoff_phi_log({std::pow(Rl, 0.75), 0, 0}, Rl) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(cutoff_phi_log({Rl, 0, 0}, Rl) == 0.0);
  CHECK_THROWS(cutoff_phi_log({1, 0, 0}, 2.0));
}

TEST_CASE("perturb: identity, core shift, outside fixity") {
  GridGeometry g = make_world(2, 96, 0.25);
  GridSet e = blobs(g, 5);
  double R = 8.0;

  SUBCASE("t = 0 is the identity") {
    GridSet p = perturb(e, R, 0.0, {0, 1, 0}, PerturbVariant::Linear);
    CHECK(p.bits == e.bits);
  }
  SUBCASE("inside B_{R/2} the map is an exact 2-cell shift") {
    double t = 2 * g.h;
    GridSet p = perturb(e, R, t, {0, 1, 0}, PerturbVariant::Linear);
    GridSet sh = e.shifted({0, 2, 0});
    long long mismatch = 0, core = 0;
    for (int y = 0; y < g.ny; ++y)
      for (int x = 0; x < g.nx; ++x) {
        Vec c = g.center(x, y, 0);
        if (norm(c) < R / 2 - t - g.h) {
          ++core;
          mismatch += p.at(x, y) != sh.at(x, y);
        }
      }
    CHECK(core > 0);
    CHECK(mismatch == 0);
  }
  SUBCASE("outside B_R the set is untouched") {
    double t = 3 * g.h;
    GridSet p = perturb(e, R, t, {1, 0, 0}, PerturbVariant::Linear);
    for (int y = 0; y < g.ny; ++y)
      for (int x = 0; x < g.nx; ++x) {
        Vec c = g.center(x, y, 0);
        if (norm(c) >= R + t + 1e-12) CHECK(p.at(x, y) == e.at(x, y));
      }
  }
  SUBCASE("measure preserved in the core region (bit-shift oracle)") {
    double t = 2 * g.h;
    GridSet p = perturb(e, R, t, {0, 1, 0}, PerturbVariant::Linear);
    GridSet sh = e.shifted({0, 2, 0});
    DomainMask core = make_ball_domain(g, {0, 0, 0}, R / 2 - t - g.h, e);
    CHECK(symmetric_difference_measure(p, sh, core) == 0.0);
  }
  SUBCASE("|t| >= 1 rejected") {
    CHECK_THROWS(perturb(e, R, 1.0, {0, 1, 0}, PerturbVariant::Linear));
  }
}

TEST_CASE("lemma 2A defect: trivial and structured rows") {
  GridGeometry g = make_world(2, 96, 0.25);
  InteractionWeights W = frac_weights(g, 8);
  InteractionWeights Ws = frac_weights(g, 8, true);
  GridSet hp = rasterize_halfplane(g, {0, 1, 0}, 0.0);
  double R = 8.0;

  SUBCASE("t = 0 gives zero on both sides") {
    auto d = lemma2a_defect(hp, R, 0.0, {0, 1, 0}, PerturbVariant::Linear, W, Ws);
    CHECK(d.lhs == 0.0);
    CHECK(d.rhs == 0.0);
  }
  SUBCASE("halfplane translated along itself barely moves") {
    double t = 2 * g.h;
    auto d = lemma2a_defect(hp, R, t, {1, 0, 0}, PerturbVariant::Linear, W, Ws);
    CHECK(std::fabs(d.lhs) <= 0.05 * d.rhs);
    CHECK(d.defect <= 0.0 + 1e-9);
  }
  SUBCASE("random set: defect within 5 percent of rhs") {
    GridSet e = blobs(g, 17);
    for (auto variant : {PerturbVariant::Linear, PerturbVariant::Log}) {
      auto d = lemma2a_defect(e, 16.0, 2 * g.h, {0, 1, 0}, variant, W, Ws);
      CHECK(d.defect <= 0.05 * d.rhs);
    }
  }
}

TEST_CASE("translation product rows") {
  GridGeometry g = make_world(2, 64, 1.0 / 16);
  GridSet hp = rasterize_halfplane(g, {0, 1, 0}, 0.0);
  DomainMask b1 = make_ball_domain(g, {0, 0, 0}, 1.0, hp);

  SUBCASE("halfplane, normal direction: one factor vanishes") {
    auto res = translation_product(hp, b1, {0, 1, 0}, {g.h, 2 * g.h});
    for (const auto& row : res.rows) CHECK(row.value == 0.0);
  }
  SUBCASE("halfplane, tangent direction: both factors vanish") {
    auto res = translation_product(hp, b1, {1, 0, 0}, {g.h, 2 * g.h});
    for (const auto& row : res.rows) {
      CHECK(row.grow == 0.0);
      CHECK(row.shrink == 0.0);
    }
  }
  SUBCASE("random set matches the popcount oracle") {
    GridSet e = random_set(g, 0.5, 3);
    double t = 2 * g.h;
    auto res = translation_product(e, b1, {0, 1, 0}, {t});
    GridSet sh = e.shifted({0, 2, 0});
    long long grow = 0, shrink = 0;
    for (int y = 0; y < g.ny; ++y)
      for (int x = 0; x < g.nx; ++x) {
        if (!b1.inside(g.index(x, y, 0))) continue;
        grow += sh.at(x, y) && !e.at(x, y);
        shrink += e.at(x, y) && !sh.at(x, y);
      }
    CHECK(res.rows[0].grow == doctest::Approx(double(grow) * g.cell_measure()).epsilon(1e-12));
    CHECK(res.rows[0].shrink == doctest::Approx(double(shrink) * g.cell_measure()).epsilon(1e-12));
  }
}

TEST_CASE("flatness certificate: exact grid halfplane") {
  GridGeometry g = make_world(2, 48, 1.0 / 16);
  GridSet hp = rasterize_halfplane(g, {0, 1, 0}, 0.0);  // x2 <= 0
  DomainMask b1 = make_ball_domain(g, {0, 0, 0}, 1.0, hp);
  auto cert = flatness_certificate(hp, b1, 90);
  CHECK(cert.mu == 0.0);
  CHECK(cert.bad_measure == 0.0);
  CHECK(cert.symdiff == 0.0);
  CHECK(cert.eps == 0.0);
  // graph is flat: all good lines carry the same height
  CHECK(cert.osc_g <= g.h + 1e-12);
}

TEST_CASE("flatness certificate: halfplane with flipped cells off the interface") {
  GridGeometry g = make_world(2, 48, 1.0 / 16);
  GridSet hp = rasterize_halfplane(g, {0, 1, 0}, 0.0);
  // flip k cells well above the interface, distinct columns
  int k = 3;
  std::vector<int> cols = {20, 24, 28};
  for (int c : cols) hp.bits[g.index(c, 40, 0)] = 1;
  DomainMask b1 = make_ball_domain(g, {0, 0, 0}, 1.0, hp);
  auto cert = flatness_certificate(hp, b1, 90);
  CHECK(cert.bad_measure <= k * g.h + 1e-12);
  CHECK(cert.symdiff <= k * g.cell_measure() + 1e-12);
}

TEST_CASE("flatness certificate: monotone staircase is recovered as a graph") {
  GridGeometry g = make_world(2, 48, 1.0 / 16);
  GridSet st(g);
  auto g0 = [&](double x) { return 0.25 * std::floor(2.0 * x) / 2.0; };
  for (int y = 0; y < g.ny; ++y)
    for (int x = 0; x < g.nx; ++x) {
      Vec c = g.center(x, y, 0);
      st.bits[g.index(x, y, 0)] = c[1] <= g0(c[0]) ? 1 : 0;
    }
  DomainMask b1 = make_ball_domain(g, {0, 0, 0}, 1.0, st);
  // in the axis frame the vertical lines are all monotone
  auto dv = directional_variation(st, b1, {0, 1, 0});
  CHECK(dv.phi_minus == 0.0);
  auto cert = flatness_certificate(st, b1, 90);
  CHECK(cert.bad_measure == 0.0);
  // F2 contract: off the bad set, E cap B1 is exactly the subgraph of g,
  // cell-wise along the certificate's own vertical lines
  const Vec en = cert.frame[2];
  long long checked = 0;
  for (std::size_t i = 0; i < cert.g_values.size(); ++i) {
    if (std::isnan(cert.g_values[i])) continue;
    const auto& L = cert.vertical.lines[i];
    Vec base = cert.vertical.base + (g.h * L.o1) * cert.vertical.w1;
    for (double t = L.t_first; t <= L.t_last + 1e-12; t += g.h) {
      Vec p = base + t * en;
      int cx = int(std::lround((p[0] - g.origin[0]) / g.h));
      int cy = int(std::lround((p[1] - g.origin[1]) / g.h));
      if (!g.inside(cx, cy, 0) || !b1.inside(g.index(cx, cy, 0))) continue;
      CHECK(int(st.at(cx, cy)) == int(t <= cert.g_values[i]));
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("certificate symdiff dominates the exhaustive halfspace fit") {
  GridGeometry g = make_world(2, 40, 1.0 / 16);
  for (int trial = 0; trial < 10; ++trial) {
    GridSet e = random_set(g, 0.45, 60 + trial);
    DomainMask b1 = make_ball_domain(g, {0, 0, 0}, 1.0, e);
    auto cert = flatness_certificate(e, b1, 45);
    auto fit = best_halfspace_fit(e, b1, 64);
    CHECK(fit.symdiff <= cert.symdiff + 1e-12);
  }
}

TEST_CASE("minimizers obey the phi bound from the stability chain") {
  // min over sampled v of min{Phi+, Phi-}(v) <= sqrt(8 P_{K*,B_R}(E)/R^2)
  // plus rasterization slack
  GridGeometry g = make_world(2, 112, 0.2);
  InteractionWeights W = frac_weights(g, 10);
  InteractionWeights Ws = frac_weights(g, 10, true);
  double R = 8.0;
  for (int trial = 0; trial < 5; ++trial) {
    GridSet ext = blobs(g, 900 + trial);
    DomainMask dom = make_ball_domain(g, {0, 0, 0}, R, ext);
    auto mr = minimize(dom, W);
    DomainMask b1 = make_ball_domain(g, {0, 0, 0}, 1.0, ext);
    double best = 1e300;
    for (int a = 0; a < 16; ++a) {
      double th = 3.14159265358979323846 * a / 16.0;
      auto dv = directional_variation(mr.e_min, b1, {std::cos(th), std::sin(th), 0});
      best = std::min(best, std::min(dv.phi_plus, dv.phi_minus));
    }
    double pstar = k_perimeter(mr.e_min, dom, Ws).total;
    double bound = std::sqrt(8.0 * pstar / (R * R));
    CHECK(best <= bound + 4 * g.h);
  }
}
