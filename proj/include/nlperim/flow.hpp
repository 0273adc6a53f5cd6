#ifndef NLPERIM_FLOW_HPP
#define NLPERIM_FLOW_HPP

#include <string>
#include <vector>

#include "nlperim/grid.hpp"
#include "nlperim/weights.hpp"

namespace nlperim {

enum class ScheduleKind { FractionalSub1, FractionalSuper1, Custom };

/// Diffusion-horizon schedule omega(tau): tau^{s/(1+s)} for s in (0,1),
/// tau^{s/2} for s in (1,2), or a fixed custom omega.
struct Schedule {
  ScheduleKind kind = ScheduleKind::FractionalSub1;
  double s = 0.5;
  double omega_custom = 0.0;

  double omega(double tau) const {
    switch (kind) {
      case ScheduleKind::FractionalSub1: return std::pow(tau, s / (1.0 + s));
      case ScheduleKind::FractionalSuper1: return std::pow(tau, s / 2.0);
      case ScheduleKind::Custom: return omega_custom;
    }
    return 0.0;
  }
};

enum class FlowBoundary { Periodic, ZeroExterior };

struct FlowState {
  GridSet set;
  int step = 0;
  double tau = 0;
  Schedule schedule;
  int substeps_last = 0;
  std::vector<double> volume_history;
};

FlowState make_flow_state(const GridSet& initial, double tau, const Schedule& schedule);

/// Explicit Euler for v_t + Lv = 0 up to time omega, with
/// L u(x) = sum_k (u(x) - u(x+k)) w(k) / h^n.  substeps == 0 picks the
/// largest step count satisfying the monotone-scheme bound
/// delta * sum_k w(k)/h^n <= 1; passing a violating count throws.
Field diffuse(const Field& u, const InteractionWeights& w, double omega, int substeps = 0,
              FlowBoundary bc = FlowBoundary::Periodic);

/// Diffuse then threshold at 1/2; a value of exactly 1/2 keeps the previous
/// cell state (cells are binary; the continuum flow assigns 1/2 on the
/// boundary).
FlowState mbo_step(const FlowState& state, const InteractionWeights& w,
                   FlowBoundary bc = FlowBoundary::Periodic);

struct FlowTrajectoryRow {
  int step = 0;
  double volume = 0;
  double symdiff_initial = 0;
  double symdiff_prev = 0;
  double interface_position = 0;  // volume-equivalent height proxy
};

struct FlowTrajectory {
  std::vector<FlowTrajectoryRow> rows;
  bool extinct = false;      // empty or full world
  bool fixed_point = false;  // consecutive steps identical
  GridSet final_set;

  std::string csv() const;
};

FlowTrajectory run_flow(const GridSet& initial, const InteractionWeights& w, double tau,
                        int steps, const Schedule& schedule,
                        FlowBoundary bc = FlowBoundary::Periodic);

}  // namespace nlperim

#endif
