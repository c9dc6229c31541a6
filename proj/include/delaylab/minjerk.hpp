#pragma once

#include <array>
#include <vector>

#include "delaylab/dynamics.hpp"
#include "delaylab/tasks.hpp"

namespace delaylab {

/// Boundary data of one axis: position, velocity, acceleration.
struct AxisState {
  double position = 0.0;
  double velocity = 0.0;
  double acceleration = 0.0;
};

/// x(t) = a0 + a1 t + a2 t^2 + a3 t^3 + a4 t^4 + a5 t^5
struct QuinticCoeffs {
  std::array<double, 6> a{};

  double position(double t) const;
  double velocity(double t) const;
  double acceleration(double t) const;
  double jerk(double t) const;
};

/// Minimum-squared-jerk polynomial from `init` to rest at `target` in
/// time T > 0. a0..a2 follow from the initial conditions; a3..a5 solve
/// the reduced 3x3 system from the terminal conditions.
QuinticCoeffs solve_quintic(const AxisState& init, double target, double T);

/// Initial jerk of that polynomial in closed form:
///   60 (target - x0) / T^3 - 36 v0 / T^2 - 9 acc0 / T.
double initial_jerk(const AxisState& init, double target, double T);

/// True when two distinct initial axis states produce the same initial
/// jerk for every target at this fixed horizon, i.e.
///   60 dx + 36 T dv + 9 T^2 da = 0
/// within 1e-9 relative. Identical states are rejected.
bool nsctp_fixed_T(const AxisState& a, const AxisState& b, double T);

struct SeparatingTime {
  std::vector<double> roots;  ///< positive roots of the coincidence quadratic
  /// Starts at max(1, 2 * largest root) and is halved until the gap
  /// clears 1e-6 in magnitude, which shrinking always achieves.
  double chosen_T = 0.0;
  double jerk_gap = 0.0;  ///< initial-jerk difference at chosen_T (target-independent)
};

/// Horizons at which the two states' initial jerks coincide for all
/// targets solve 9 da T^2 + 36 dv T + 60 dx = 0; away from those roots
/// the initial jerks differ for every target.
SeparatingTime separating_time(const AxisState& a, const AxisState& b);

struct PlanarState {
  AxisState x;
  AxisState y;
};

struct MinJerkTask {
  Eigen::Vector2d target = Eigen::Vector2d::Zero();
  double horizon = 0.0;
};

/// Receding-horizon jerk command: re-solves the quintic per axis from
/// the current state over the remaining time and returns its initial
/// jerk. Throws once the horizon is spent (elapsed >= T).
Eigen::Vector2d minjerk_control(const PlanarState& current,
                                const MinJerkTask& task, double elapsed);

/// Conversions between the 6-D plant state (x, y, xd, yd, xdd, ydd)
/// and per-axis boundary data.
PlanarState planar_from_state(const State& s);
State state_from_planar(const PlanarState& p);

/// Tolerances for judging a fixed-horizon segment of a planar run.
struct FixedTimeAuditParams {
  double endpoint_tol = 5e-3;   ///< infinity-norm miss at the horizon
  double cost_rel_tol = 2e-2;   ///< measured jerk cost vs. quintic optimum
};

/// Oracle for SetpointFixedTime segments: the state at segment start +
/// T must match (target, 0, 0) per axis within endpoint_tol, and the
/// measured jerk cost must not exceed the quintic optimum computed
/// from the segment's entry state by more than cost_rel_tol.
SegmentOracle fixed_time_oracle(const FixedTimeAuditParams& params);

}  // namespace delaylab
