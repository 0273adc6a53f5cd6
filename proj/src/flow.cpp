#include "nlperim/flow.hpp"

#include <cmath>
#include <cstdio>

#include "nlperim/geometry.hpp"

namespace nlperim {

FlowState make_flow_state(const GridSet& initial, double tau, const Schedule& schedule) {
  FlowState st;
  st.set = initial;
  st.tau = tau;
  st.schedule = schedule;
  st.volume_history.push_back(initial.measure());
  return st;
}

Field diffuse(const Field& u, const InteractionWeights& W, double omega, int substeps,
              FlowBoundary bc) {
  const auto& g = u.geom;
  if (!g.same_layout(W.geom)) throw std::invalid_argument("weights built for another world");
  double hn = g.cell_measure();
  double rate_total = W.total_weight / hn;
  if (substeps <= 0) substeps = std::max(1, int(std::ceil(omega * rate_total * (1.0 + 1e-12))));
  double delta = omega / substeps;
  if (delta * rate_total > 1.0 + 1e-9)
    throw StabilityViolation("explicit Euler substep breaks the monotone-scheme bound");

  const int c = W.cutoff, zc = g.dim == 3 ? c : 0;
  const int nx = g.nx, ny = g.ny, nz = g.nz;
  Field cur = u, next(g);
  for (int step = 0; step < substeps; ++step) {
    for (int z = 0; z < nz; ++z)
      for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x) {
          Accum acc;  // sum_k w(k) u(x+k), fixed offset order
          for (int kz = -zc; kz <= zc; ++kz) {
            int bz = z + kz;
            if (bc == FlowBoundary::Periodic)
              bz = (bz % nz + nz) % nz;
            else if (bz < 0 || bz >= nz)
              continue;
            for (int ky = -c; ky <= c; ++ky) {
              int by = y + ky;
              if (bc == FlowBoundary::Periodic)
                by = (by % ny + ny) % ny;
              else if (by < 0 || by >= ny)
                continue;
              for (int kx = -c; kx <= c; ++kx) {
                if (kx == 0 && ky == 0 && kz == 0) continue;
                int bx = x + kx;
                if (bc == FlowBoundary::Periodic)
                  bx = (bx % nx + nx) % nx;
                else if (bx < 0 || bx >= nx)
                  continue;
                double f = cur.v[g.index(bx, by, bz)];
                if (f != 0.0) acc.add(W.at(kx, ky, kz) * f);
              }
            }
          }
          auto idx = g.index(x, y, z);
          next.v[idx] = (1.0 - delta * rate_total) * cur.v[idx] + (delta / hn) * acc.value();
        }
    std::swap(cur, next);
  }
  return cur;
}

FlowState mbo_step(const FlowState& state, const InteractionWeights& W, FlowBoundary bc) {
  FlowState out = state;
  double omega = state.schedule.omega(state.tau);
  double hn = state.set.geom.cell_measure();
  double rate_total = W.total_weight / hn;
  int substeps = std::max(1, int(std::ceil(omega * rate_total * (1.0 + 1e-12))));
  Field v = diffuse(Field::from_set(state.set), W, omega, substeps, bc);
  for (std::size_t i = 0; i < v.v.size(); ++i) {
    if (v.v[i] > 0.5)
      out.set.bits[i] = 1;
    else if (v.v[i] < 0.5)
      out.set.bits[i] = 0;
    else
      out.set.bits[i] = state.set.bits[i];
  }
  out.step = state.step + 1;
  out.substeps_last = substeps;
  out.volume_history.push_back(out.set.measure());
  return out;
}

std::string FlowTrajectory::csv() const {
  std::string s = "step,volume,symdiff_initial,symdiff_prev,interface_position\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n", r.step, r.volume,
                  r.symdiff_initial, r.symdiff_prev, r.interface_position);
    s += buf;
  }
  return s;
}

FlowTrajectory run_flow(const GridSet& initial, const InteractionWeights& W, double tau,
                        int steps, const Schedule& schedule, FlowBoundary bc) {
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  const auto& g = initial.geom;
  DomainMask full = make_full_domain(g);
  double cross = g.dim == 2 ? g.nx * g.h : double(g.nx) * g.ny * g.h * g.h;
  double bottom = g.origin[g.dim - 1] - 0.5 * g.h;

  FlowTrajectory traj;
  FlowState st = make_flow_state(initial, tau, schedule);
  GridSet prev = initial;
  for (int i = 0; i < steps; ++i) {
    st = mbo_step(st, W, bc);
    FlowTrajectoryRow row;
    row.step = st.step;
    row.volume = st.set.measure();
    row.symdiff_initial = symmetric_difference_measure(st.set, initial, full);
    row.symdiff_prev = symmetric_difference_measure(st.set, prev, full);
    row.interface_position = bottom + row.volume / cross;
    traj.rows.push_back(row);
    if (st.set.count() == 0 || st.set.count() == g.cells()) {
      traj.extinct = true;
      break;
    }
    if (row.symdiff_prev == 0.0) {
      traj.fixed_point = true;
      break;
    }
    prev = st.set;
  }
  traj.final_set = st.set;
  return traj;
}

}  // namespace nlperim
