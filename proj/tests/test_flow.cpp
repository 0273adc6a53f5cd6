#include "nlperim/flow.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "nlperim/geometry.hpp"

using namespace nlperim;

namespace {
InteractionWeights frac_weights(const GridGeometry& g, int cutoff, double s = 0.5) {
  Kernel k = make_kernel(KernelFamily::Fractional, g.dim, {.s = s});
  return build_weights(k, g, cutoff);
}
}  // namespace

TEST_CASE("schedules") {
  Schedule f{ScheduleKind::FractionalSub1, 0.5, 0.0};
  CHECK(f.omega(0.001) == doctest::Approx(std::pow(0.001, 0.5 / 1.5)).epsilon(1e-12));
  Schedule s2{ScheduleKind::FractionalSuper1, 1.5, 0.0};
  CHECK(s2.omega(0.01) == doctest::Approx(std::pow(0.01, 0.75)).epsilon(1e-12));
  Schedule c{ScheduleKind::Custom, 0.0, 0.07};
  CHECK(c.omega(123.0) == 0.07);
}

TEST_CASE("diffusion annihilates constants") {
  GridGeometry g = make_world(2, 24, 0.125);
  InteractionWeights W = frac_weights(g, 6);
  Field u(g, 0.37);
  Field v = diffuse(u, W, 0.01);
  for (double x : v.v) CHECK(x == doctest::Approx(0.37).epsilon(1e-13));
}

TEST_CASE("stability bound is enforced") {
  GridGeometry g = make_world(2, 16, 0.125);
  InteractionWeights W = frac_weights(g, 6);
  Field u(g, 0.0);
  double rate = W.total_weight / g.cell_measure();
  double omega = 10.0 / rate;  // needs at least 10 substeps
  CHECK_THROWS_AS(diffuse(u, W, omega, 2), StabilityViolation);
  CHECK_NOTHROW(diffuse(u, W, omega, 16));
}

TEST_CASE("halfplane diffusion is odd across the interface") {
  GridGeometry g = make_world(2, 32, 0.125);
  InteractionWeights W = frac_weights(g, 8);
  GridSet hp = rasterize_halfplane(g, {0, 1, 0}, 0.0);
  // periodic stripe: reflection u -> 1-u maps the state to itself, so
  // v(above) + v(below) == 1 on mirrored rows near each interface
  Field v = diffuse(Field::from_set(hp), W, 0.5 / (W.total_weight / g.cell_measure()), 1);
  int yb = 0;
  for (int y = 0; y + 1 < g.ny; ++y) {
    Vec c0 = g.center(0, y, 0), c1 = g.center(0, y + 1, 0);
    if (c0[1] < 0 && c1[1] > 0) yb = y;
  }
  for (int x = 0; x < g.nx; ++x) {
    double below = v.v[g.index(x, yb, 0)], above = v.v[g.index(x, yb + 1, 0)];
    CHECK(below + above == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(below > 0.5);
    CHECK(above < 0.5);
  }
}

TEST_CASE("mass is conserved on the torus") {
  GridGeometry g = make_world(2, 24, 0.125);
  InteractionWeights W = frac_weights(g, 6);
  Field u(g, 0.0);
  u.v[g.index(12, 13, 0)] = 1.0;  // single impulse
  Field v = diffuse(u, W, 0.9 / (W.total_weight / g.cell_measure()), 3);
  long double sum = 0;
  for (double x : v.v) sum += x;
  CHECK(double(sum) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mbo: halfplane is a fixed point, all-zero stays fixed") {
  GridGeometry g = make_world(2, 32, 0.125);
  InteractionWeights W = frac_weights(g, 8);
  GridSet hp = rasterize_halfplane(g, {0, 1, 0}, 0.0);
  Schedule sched{ScheduleKind::FractionalSub1, 0.5, 0.0};
  auto traj = run_flow(hp, W, 1e-3, 50, sched);
  for (const auto& row : traj.rows) CHECK(row.symdiff_initial <= g.nx * g.h * g.h + 1e-12);

  GridSet zero(g);
  FlowState st = make_flow_state(zero, 1e-3, sched);
  FlowState st2 = mbo_step(st, W);
  CHECK(st2.set.bits == zero.bits);
}

TEST_CASE("mbo: ball volume decreases strictly until extinction") {
  GridGeometry g = make_world(2, 64, 0.125);
  InteractionWeights W = frac_weights(g, 10);
  GridSet ball = rasterize_ball(g, {0, 0, 0}, 1.5);

  // curvature-sign oracle: L u > 0 on the outer boundary ring of the ball
  {
    double hn = g.cell_measure();
    int checked = 0;
    for (int y = 0; y < g.ny; ++y)
      for (int x = 0; x < g.nx; ++x) {
        if (!ball.at(x, y)) continue;
        double r = norm(g.center(x, y, 0));
        if (r < 1.5 - 2 * g.h) continue;  // boundary cells only
        Accum acc;  // L u(x) = sum_k (u(x) - u(x+k)) w(k)/h^n
        for (int ky = -10; ky <= 10; ++ky)
          for (int kx = -10; kx <= 10; ++kx) {
            if (!kx && !ky) continue;
            int bx = (x + kx + g.nx) % g.nx, by = (y + ky + g.ny) % g.ny;
            acc.add(W.at(kx, ky) * (1.0 - double(ball.at(bx, by))));
          }
        CHECK(acc.value() / hn > 0.0);
        ++checked;
      }
    CHECK(checked > 0);
  }

  Schedule sched{ScheduleKind::FractionalSub1, 0.5, 0.0};
  auto traj = run_flow(ball, W, 1e-5, 400, sched);
  CHECK(traj.extinct);
  CHECK(traj.rows.size() >= 3);  // gradual, not a one-step wipe
  double prev = ball.measure();
  for (const auto& row : traj.rows) {
    CHECK(row.volume < prev);
    prev = row.volume;
  }
}

TEST_CASE("comparison principle on nested pairs") {
  GridGeometry g = make_world(2, 24, 0.125);
  InteractionWeights W = frac_weights(g, 6);
  Schedule sched{ScheduleKind::FractionalSub1, 0.5, 0.0};
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    GridSet e = random_set(g, 0.4, 800 + trial);
    GridSet f = e;
    for (auto& b : f.bits)
      if (!b && rng() % 3 == 0) b = 1;  // F contains E
    FlowState se = make_flow_state(e, 1e-3, sched);
    FlowState sf = make_flow_state(f, 1e-3, sched);
    GridSet e1 = mbo_step(se, W).set, f1 = mbo_step(sf, W).set;
    for (std::size_t i = 0; i < e1.bits.size(); ++i) CHECK(e1.bits[i] <= f1.bits[i]);
  }
}

TEST_CASE("translation equivariance is bit exact on the torus") {
  GridGeometry g = make_world(2, 24, 0.125);
  InteractionWeights W = frac_weights(g, 6);
  Schedule sched{ScheduleKind::FractionalSub1, 0.5, 0.0};
  GridSet e = random_set(g, 0.5, 4);
  Offset k = {5, -3, 0};
  GridSet a = mbo_step(make_flow_state(e.shifted(k), 1e-3, sched), W).set;
  GridSet b = mbo_step(make_flow_state(e, 1e-3, sched), W).set.shifted(k);
  CHECK(a.bits == b.bits);
}

TEST_CASE("fixed points stay fixed") {
  GridGeometry g = make_world(2, 32, 0.125);
  InteractionWeights W = frac_weights(g, 8);
  Schedule sched{ScheduleKind::FractionalSub1, 0.5, 0.0};
  GridSet hp = rasterize_halfplane(g, {0, 1, 0}, 0.03);
  FlowState st = make_flow_state(hp, 1e-3, sched);
  FlowState s1 = mbo_step(st, W);
  if (s1.set.bits == hp.bits) {  // fixed point reached: stays forever
    FlowState s2 = mbo_step(s1, W);
    FlowState s3 = mbo_step(s2, W);
    CHECK(s2.set.bits == hp.bits);
    CHECK(s3.set.bits == hp.bits);
  }
}

TEST_CASE("two far-separated balls both shrink without merging") {
  GridGeometry g = make_world(2, 96, 0.125);
  InteractionWeights W = frac_weights(g, 10);
  GridSet two(g);
  GridSet b1 = rasterize_ball(g, {-3.0, 0, 0}, 1.4), b2 = rasterize_ball(g, {3.0, 0, 0}, 1.4);
  for (std::size_t i = 0; i < two.bits.size(); ++i) two.bits[i] = b1.bits[i] || b2.bits[i];
  Schedule sched{ScheduleKind::FractionalSub1, 0.5, 0.0};
  FlowState st = make_flow_state(two, 1e-6, sched);
  double vol_left = b1.measure(), vol_right = b2.measure();
  for (int step = 0; step < 3; ++step) {
    st = mbo_step(st, W);
    double vl = 0, vr = 0;
    bool middle_empty = true;
    for (int y = 0; y < g.ny; ++y)
      for (int x = 0; x < g.nx; ++x) {
        if (!st.set.at(x, y)) continue;
        double cx = g.center(x, y, 0)[0];
        if (cx < -1.5)
          vl += g.cell_measure();
        else if (cx > 1.5)
          vr += g.cell_measure();
        else
          middle_empty = false;
      }
    CHECK(vl < vol_left);
    CHECK(vr < vol_right);
    CHECK(middle_empty);
    vol_left = vl;
    vol_right = vr;
  }
}

TEST_CASE("trajectory csv has one row per step") {
  GridGeometry g = make_world(2, 24, 0.125);
  InteractionWeights W = frac_weights(g, 6);
  Schedule sched{ScheduleKind::FractionalSub1, 0.5, 0.0};
  auto traj = run_flow(rasterize_ball(g, {0, 0, 0}, 0.8), W, 2e-2, 5, sched);
  auto csv = traj.csv();
  CHECK(csv.find("step,volume") == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == std::int64_t(traj.rows.size()) + 1);
}
