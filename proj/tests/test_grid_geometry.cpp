#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>

#include "doctest.h"
#include "nlperim/geometry.hpp"
#include "nlperim/grid.hpp"

using namespace nlperim;

namespace {
constexpr double kPi = std::numbers::pi;

// dumb per-line jump oracle for axis directions (independent of the library
// scan: walks raw rows/columns)
void axis_jump_oracle(const GridSet& e, const DomainMask& om, int axis, long long& plus,
                      long long& minus) {
  const auto& g = e.geom;
  plus = minus = 0;
  int a1 = axis == 0 ? 1 : 0;
  for (int j = 0; j < g.extent(a1); ++j) {
    int prev = -1;
    for (int i = 0; i < g.extent(axis); ++i) {
      int c[3] = {0, 0, 0};
      c[axis] = i;
      c[a1] = j;
      auto idx = g.index(c[0], c[1], c[2]);
      if (!om.inside(idx)) {
        prev = -1;
        continue;
      }
      int u = e.bits[idx];
      if (prev == 1 && u == 0) ++plus;
      if (prev == 0 && u == 1) ++minus;
      prev = u;
    }
  }
}
}  // namespace

TEST_CASE("pbm round trip is bit exact") {
  GridGeometry g = make_world(2, 17, 0.25);
  GridSet s = random_set(g, 0.4, 42);
  std::string path = (std::filesystem::temp_directory_path() / "nlperim_t.pbm").string();
  write_pbm(s, path);
  GridSet r = read_pbm(path);
  CHECK(r.bits == s.bits);
  CHECK(r.geom.h == s.geom.h);
  CHECK(r.geom.origin == s.geom.origin);

  GridGeometry g3 = make_world(3, 9, 0.5);
  GridSet s3 = random_set(g3, 0.5, 43);
  write_pbm(s3, path);
  GridSet r3 = read_pbm(path);
  CHECK(r3.bits == s3.bits);
  CHECK(r3.geom.nz == 9);
}

TEST_CASE("measure, complement, partition") {
  GridGeometry g = make_world(2, 8, 0.125);
  GridSet s = random_set(g, 0.5, 7);
  CHECK(s.measure() == doctest::Approx(double(s.count()) * 0.125 * 0.125));
  GridSet c = s.complemented();
  CHECK(c.complemented().bits == s.bits);
  CHECK(s.count() + c.count() == g.cells());
}

TEST_CASE("classical perimeter: exactly resolved squares") {
  // axis-aligned unit square on a 1/8 grid: perimeter 4, exactly
  GridGeometry g = make_world(2, 32, 0.125);
  GridSet sq = rasterize_box(g, {-0.5, -0.5, 0}, {0.5, 0.5, 0});
  DomainMask full = make_full_domain(g);
  CHECK(classical_perimeter(sq, full) == doctest::Approx(4.0).epsilon(1e-12));

  // single cell: 4h
  GridSet one(g);
  one.set(10, 12, 0, 1);
  CHECK(classical_perimeter(one, full) == doctest::Approx(4.0 * 0.125).epsilon(1e-12));

  // single cell in 3d: 6h^2
  GridGeometry g3 = make_world(3, 8, 0.25);
  GridSet one3(g3);
  one3.set(3, 4, 5, 1);
  CHECK(classical_perimeter(one3, make_full_domain(g3)) ==
        doctest::Approx(6.0 * 0.25 * 0.25).epsilon(1e-12));
}

TEST_CASE("classical perimeter: 45-degree square staircases to 4 sqrt 2") {
  for (int n : {64, 128, 256}) {
    double rho = 2.0 / n;
    GridGeometry g = make_world(2, n, rho);
    GridSet diamond(g);
    const double r = std::sqrt(2.0) / 2.0;
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        Vec c = g.center(x, y, 0);
        diamond.bits[g.index(x, y, 0)] = std::fabs(c[0]) + std::fabs(c[1]) <= r ? 1 : 0;
      }
    double per = classical_perimeter(diamond, make_full_domain(g));
    // convex raster: per = 2(width + height); each extent lies in
    // [sqrt(2) - 2 rho, sqrt(2)], so per never exceeds 4 sqrt(2) and misses
    // it by at most 8 rho
    CHECK(per <= 4.0 * std::sqrt(2.0) + 1e-12);
    CHECK(per >= 4.0 * std::sqrt(2.0) - 8.0 * rho - 1e-12);
  }
}

TEST_CASE("directional variation: halfplane examples") {
  GridGeometry g = make_world(2, 64, 1.0 / 16);
  GridSet hp = rasterize_halfplane(g, {0, 1, 0}, 0.0);  // x2 <= 0
  DomainMask b1 = make_ball_domain(g, {0, 0, 0}, 1.0, hp);

  auto dv = directional_variation(hp, b1, {0, 1, 0});
  // one 1->0 jump per vertical line crossing the interface; total ~ diameter
  CHECK(dv.phi_plus == doctest::Approx(2.0).epsilon(0.08));
  CHECK(dv.phi_minus == 0.0);

  auto dh = directional_variation(hp, b1, {1, 0, 0});
  CHECK(dh.phi_plus == 0.0);
  CHECK(dh.phi_minus == 0.0);
}

TEST_CASE("directional variation matches the exhaustive line-walk oracle") {
  GridGeometry g = make_world(2, 8, 0.25);
  DomainMask full = make_full_domain(g);
  for (int trial = 0; trial < 25; ++trial) {
    GridSet e = random_set(g, 0.5, 100 + trial);
    for (int axis = 0; axis < 2; ++axis) {
      Vec v = axis == 0 ? Vec{1, 0, 0} : Vec{0, 1, 0};
      auto dv = directional_variation(e, full, v);
      long long plus, minus;
      axis_jump_oracle(e, full, axis, plus, minus);
      CHECK(dv.phi_plus == double(plus) * g.h);
      CHECK(dv.phi_minus == double(minus) * g.h);
    }
  }
}

TEST_CASE("phi(-v) swaps the signed counts bit-exactly") {
  GridGeometry g = make_world(2, 32, 0.125);
  GridSet e = random_set(g, 0.5, 5);
  DomainMask b1 = make_ball_domain(g, {0, 0, 0}, 1.5, e);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> uni(0, 2 * kPi);
  for (int i = 0; i < 40; ++i) {
    double th = uni(rng);
    Vec v = {std::cos(th), std::sin(th), 0};
    auto a = directional_variation(e, b1, v);
    auto b = directional_variation(e, b1, {-v[0], -v[1], 0});
    CHECK(a.phi_plus == b.phi_minus);
    CHECK(a.phi_minus == b.phi_plus);
  }
  for (Vec v : {Vec{1, 0, 0}, Vec{0, 1, 0}}) {
    auto a = directional_variation(e, b1, v);
    auto b = directional_variation(e, b1, {-v[0], -v[1], 0});
    CHECK(a.phi_plus == b.phi_minus);
    CHECK(a.phi_minus == b.phi_plus);
  }
}

TEST_CASE("lines without down-jumps are nondecreasing along +v") {
  GridGeometry g = make_world(2, 16, 0.25);
  DomainMask full = make_full_domain(g);
  for (int trial = 0; trial < 20; ++trial) {
    GridSet e = random_set(g, 0.35, 300 + trial);
    auto dv = directional_variation(e, full, {0, 1, 0});
    for (const auto& L : dv.lines) {
      if (L.i_plus != 0) continue;
      // direct scan: no 1 -> 0 transitions means the column never decreases
      int prev = -1;
      bool mono = true;
      for (int y = 0; y < g.ny; ++y) {
        int u = e.at(L.o1, y, 0);
        if (prev == 1 && u == 0) mono = false;
        prev = u;
      }
      CHECK(mono);
    }
  }
}

TEST_CASE("per-axis face counts equal per-axis jump totals exactly") {
  GridGeometry g = make_world(2, 24, 0.2);
  for (int trial = 0; trial < 10; ++trial) {
    GridSet e = random_set(g, 0.5, 700 + trial);
    GridSet dummy(g);
    DomainMask om = make_ball_domain(g, {0.1, -0.2, 0}, 1.9, dummy);
    double total_faces = classical_perimeter(e, om) / g.h;
    double total_jumps = 0;
    for (int axis = 0; axis < 2; ++axis) {
      Vec v = axis == 0 ? Vec{1, 0, 0} : Vec{0, 1, 0};
      auto dv = directional_variation(e, om, v);
      total_jumps += (dv.phi_plus + dv.phi_minus) / g.h;
    }
    CHECK(total_faces == doctest::Approx(total_jumps).epsilon(1e-12));
  }
}

TEST_CASE("crofton: halfplane and empty set") {
  GridGeometry g = make_world(2, 128, 1.0 / 64);
  GridSet hp = rasterize_halfplane(g, {0, 1, 0}, 0.0);
  DomainMask b1 = make_ball_domain(g, {0, 0, 0}, 1.0, hp);
  auto ce = crofton_perimeter(hp, b1, 100000, 2024);
  CHECK(std::fabs(ce.estimate - 2.0) <= 3.0 * ce.stderr_ + 0.05);

  GridSet empty(g);
  auto c0 = crofton_perimeter(empty, b1, 1000, 1);
  CHECK(c0.estimate == 0.0);
}

TEST_CASE("crofton: disk estimate tracks the raster perimeter") {
  // unit world, disk radius 0.4; the voxel walk counts every staircase
  // face crossing, so the estimator targets classical_perimeter(raster)
  GridGeometry g = make_world(2, 256, 1.0 / 256);
  GridSet disk = rasterize_ball(g, {0, 0, 0}, 0.4);
  DomainMask full = make_full_domain(g);
  auto ce = crofton_perimeter(disk, full, 100000, 99);
  double classical = classical_perimeter(disk, full);
  CHECK(std::fabs(ce.estimate - classical) <= 0.02 * classical);
  // against the ideal circle the staircase factor 4/pi appears
  CHECK(ce.estimate == doctest::Approx(2 * kPi * 0.4 * 4.0 / kPi).epsilon(0.03));
}

TEST_CASE("crofton matches classical perimeter on random blobs") {
  GridGeometry g = make_world(2, 96, 1.0 / 48);
  DomainMask full = make_full_domain(g);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-0.6, 0.6);
  for (int trial = 0; trial < 5; ++trial) {
    GridSet blob(g);
    for (int b = 0; b < 3; ++b) {
      Vec c = {uni(rng), uni(rng), 0};
      double r = 0.15 + 0.2 * std::fabs(uni(rng));
      GridSet ball = rasterize_ball(g, c, r);
      for (std::size_t i = 0; i < blob.bits.size(); ++i) blob.bits[i] |= ball.bits[i];
    }
    auto ce = crofton_perimeter(blob, full, 40000, 500 + trial);
    double classical = classical_perimeter(blob, full);
    CHECK(std::fabs(ce.estimate - classical) <= 4.0 * ce.stderr_);
  }
}

TEST_CASE("symmetric difference measure") {
  GridGeometry g = make_world(2, 8, 0.25);
  DomainMask full = make_full_domain(g);
  GridSet e = random_set(g, 0.5, 1);
  CHECK(symmetric_difference_measure(e, e, full) == 0.0);
  CHECK(symmetric_difference_measure(e, e.complemented(), full) ==
        doctest::Approx(g.cells() * g.cell_measure()).epsilon(1e-12));
  GridSet f = random_set(g, 0.5, 2);
  long long cnt = 0;  // popcount oracle
  for (std::size_t i = 0; i < e.bits.size(); ++i) cnt += e.bits[i] != f.bits[i];
  CHECK(symmetric_difference_measure(e, f, full) ==
        doctest::Approx(double(cnt) * g.cell_measure()).epsilon(1e-12));

  GridGeometry g2 = make_world(2, 10, 0.25);
  GridSet other(g2);
  CHECK_THROWS(symmetric_difference_measure(e, other, full));
}

TEST_CASE("best halfspace fit") {
  GridGeometry g = make_world(2, 32, 1.0 / 16);
  DomainMask b1 = make_ball_domain(g, {0, 0, 0}, 0.9, GridSet(g));

  SUBCASE("grid halfplane recovers itself") {
    GridSet hp = rasterize_halfplane(g, {0, 1, 0}, 0.1);
    auto fit = best_halfspace_fit(hp, b1, 16);
    CHECK(fit.symdiff == 0.0);
  }
  SUBCASE("k flipped cells cost at most k cells") {
    GridSet hp = rasterize_halfplane(g, {0, 1, 0}, 0.1);
    std::mt19937_64 rng(3);
    int k = 5;
    for (int i = 0; i < k; ++i) {
      int x = int(rng() % g.nx), y = int(rng() % g.ny);
      hp.bits[g.index(x, y, 0)] ^= 1;
    }
    auto fit = best_halfspace_fit(hp, b1, 16);
    CHECK(fit.symdiff <= k * g.cell_measure() + 1e-12);
  }
  SUBCASE("random blob equals the same-family brute force") {
    GridSet blob = rasterize_ball(g, {0.2, -0.1, 0}, 0.5);
    auto fit = best_halfspace_fit(blob, b1, 12);
    // brute force over the same direction family and all center projections
    double best = 1e300;
    for (int d = 0; d < 12; ++d) {
      Vec v;
      if (d < 4)
        v = d == 0 ? Vec{1, 0, 0} : d == 1 ? Vec{-1, 0, 0} : d == 2 ? Vec{0, 1, 0} : Vec{0, -1, 0};
      else {
        double th = 2.0 * kPi * (d - 4) / 8;
        v = {std::cos(th), std::sin(th), 0};
      }
      std::vector<double> ts;
      for (int y = 0; y < g.ny; ++y)
        for (int x = 0; x < g.nx; ++x)
          if (b1.inside(g.index(x, y, 0))) ts.push_back(dot(g.center(x, y, 0), v));
      ts.push_back(-1e30);
      for (double t : ts) best = std::min(best, halfspace_symdiff(blob, b1, v, t));
    }
    CHECK(fit.symdiff == doctest::Approx(best).epsilon(1e-12));
  }
}
