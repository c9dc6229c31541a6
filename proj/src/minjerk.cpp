#include "delaylab/minjerk.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace delaylab {

double QuinticCoeffs::position(double t) const {
  return a[0] + t * (a[1] + t * (a[2] + t * (a[3] + t * (a[4] + t * a[5]))));
}

double QuinticCoeffs::velocity(double t) const {
  return a[1] +
         t * (2.0 * a[2] + t * (3.0 * a[3] + t * (4.0 * a[4] + t * 5.0 * a[5])));
}

double QuinticCoeffs::acceleration(double t) const {
  return 2.0 * a[2] + t * (6.0 * a[3] + t * (12.0 * a[4] + t * 20.0 * a[5]));
}

double QuinticCoeffs::jerk(double t) const {
  return 6.0 * a[3] + t * (24.0 * a[4] + t * 60.0 * a[5]);
}

QuinticCoeffs solve_quintic(const AxisState& init, double target, double T) {
  if (!(T > 0.0)) {
    throw std::invalid_argument("solve_quintic: horizon must be positive");
  }
  QuinticCoeffs q;
  q.a[0] = init.position;
  q.a[1] = init.velocity;
  q.a[2] = init.acceleration / 2.0;

  // Terminal position, velocity, acceleration pin the remaining three
  // coefficients (rest at the target).
  const double T2 = T * T;
  const double T3 = T2 * T;
  Eigen::Matrix3d A;
  A << T3, T2 * T2, T3 * T2,
       3.0 * T2, 4.0 * T3, 5.0 * T2 * T2,
       6.0 * T, 12.0 * T2, 20.0 * T3;
  Eigen::Vector3d b;
  b << target - (q.a[0] + q.a[1] * T + q.a[2] * T2),
       -(q.a[1] + 2.0 * q.a[2] * T),
       -2.0 * q.a[2];
  const Eigen::Vector3d tail = A.fullPivLu().solve(b);
  q.a[3] = tail[0];
  q.a[4] = tail[1];
  q.a[5] = tail[2];
  return q;
}

double initial_jerk(const AxisState& init, double target, double T) {
  if (!(T > 0.0)) {
    throw std::invalid_argument("initial_jerk: horizon must be positive");
  }
  const double T2 = T * T;
  const double T3 = T2 * T;
  return 60.0 * (target - init.position) / T3 - 36.0 * init.velocity / T2 -
         9.0 * init.acceleration / T;
}

namespace {

bool same_state(const AxisState& a, const AxisState& b) {
  return a.position == b.position && a.velocity == b.velocity &&
         a.acceleration == b.acceleration;
}

}  // namespace

bool nsctp_fixed_T(const AxisState& a, const AxisState& b, double T) {
  if (!(T > 0.0)) {
    throw std::invalid_argument("nsctp_fixed_T: horizon must be positive");
  }
  if (same_state(a, b)) {
    throw std::invalid_argument("nsctp_fixed_T: states must be distinct");
  }
  const double dx = a.position - b.position;
  const double dv = a.velocity - b.velocity;
  const double da = a.acceleration - b.acceleration;
  // The target-independent part of the initial-jerk difference; when it
  // vanishes no fixed-horizon target can tell the two states apart.
  const double expr = 60.0 * dx + 36.0 * T * dv + 9.0 * T * T * da;
  const double scale =
      60.0 * std::abs(dx) + 36.0 * T * std::abs(dv) + 9.0 * T * T * std::abs(da);
  return std::abs(expr) <= 1e-9 * scale;
}

SeparatingTime separating_time(const AxisState& a, const AxisState& b) {
  if (same_state(a, b)) {
    throw std::invalid_argument("separating_time: states must be distinct");
  }
  const double dx = a.position - b.position;
  const double dv = a.velocity - b.velocity;
  const double da = a.acceleration - b.acceleration;

  // Horizons where the initial jerks coincide for every target:
  //   9 da T^2 + 36 dv T + 60 dx = 0, T > 0.
  SeparatingTime out;
  const double qa = 9.0 * da;
  const double qb = 36.0 * dv;
  const double qc = 60.0 * dx;
  const double scale = std::abs(qa) + std::abs(qb) + std::abs(qc);
  const double tiny = 1e-12 * scale;
  if (std::abs(qa) <= tiny) {
    if (std::abs(qb) > tiny) {
      const double root = -qc / qb;
      if (root > 0.0) out.roots.push_back(root);
    }
    // qa ~ qb ~ 0 with distinct states leaves qc != 0: no roots at all.
  } else {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      double r1 = (-qb - sq) / (2.0 * qa);
      double r2 = (-qb + sq) / (2.0 * qa);
      if (r1 > r2) std::swap(r1, r2);
      if (r1 > 0.0) out.roots.push_back(r1);
      if (r2 > 0.0 && r2 != r1) out.roots.push_back(r2);
    }
  }

  double largest = 0.0;
  for (double r : out.roots) largest = std::max(largest, r);
  out.chosen_T = std::max(1.0, 2.0 * largest);

  const auto gap_at = [&](double T) {
    return -(60.0 * dx / (T * T * T) + 36.0 * dv / (T * T) + 9.0 * da / T);
  };
  // Demand a quantitative difference, not just a nonzero one: the gap
  // grows without bound as the horizon shrinks, so halving always
  // escapes the neighbourhood of a coincidence.
  out.jerk_gap = gap_at(out.chosen_T);
  for (int guard = 0; std::abs(out.jerk_gap) < 1e-6 && guard < 60; ++guard) {
    out.chosen_T *= 0.5;
    out.jerk_gap = gap_at(out.chosen_T);
  }
  return out;
}

Eigen::Vector2d minjerk_control(const PlanarState& current,
                                const MinJerkTask& task, double elapsed) {
  const double remaining = task.horizon - elapsed;
  if (!(remaining > 0.0)) {
    throw std::invalid_argument("minjerk_control: horizon expired");
  }
  Eigen::Vector2d jerk;
  jerk[0] = initial_jerk(current.x, task.target[0], remaining);
  jerk[1] = initial_jerk(current.y, task.target[1], remaining);
  return jerk;
}

PlanarState planar_from_state(const State& s) {
  if (s.size() != 6) {
    throw std::invalid_argument("planar_from_state: 6-D state expected");
  }
  PlanarState p;
  p.x = {s[0], s[2], s[4]};
  p.y = {s[1], s[3], s[5]};
  return p;
}

State state_from_planar(const PlanarState& p) {
  State s(6);
  s << p.x.position, p.y.position, p.x.velocity, p.y.velocity, p.x.acceleration,
      p.y.acceleration;
  return s;
}

SegmentOracle fixed_time_oracle(const FixedTimeAuditParams& params) {
  return [params](std::size_t index, const Task& task, double begin, double end,
                  const Trajectory& traj) {
    SegmentVerdict v;
    v.index = index;
    v.begin = begin;
    v.end = end;

    if (task.kind != Task::Kind::SetpointFixedTime || task.target.size() != 2) {
      v.pass = false;
      v.reason = "not a planar fixed-time task";
      return v;
    }
    if (traj.states.front().size() != 6) {
      v.pass = false;
      v.reason = "trajectory is not planar third-order";
      return v;
    }
    const double arrive = begin + task.horizon;
    if (arrive > traj.end_time() + traj.step() / 2.0 || arrive > end + traj.step() / 2.0) {
      v.pass = false;
      v.reason = "horizon extends beyond the audited window";
      return v;
    }

    const std::size_t k0 = traj.index_at(begin);
    const std::size_t ke = traj.index_at(arrive);
    State desired = State::Zero(6);
    desired[0] = task.target[0];
    desired[1] = task.target[1];
    const double miss = (traj.states[ke] - desired).lpNorm<Eigen::Infinity>();

    // Measured effort of the recorded jerks against the quintic
    // optimum re-planned from the state the segment actually entered
    // with.
    std::vector<Control> held(traj.controls.begin() + k0,
                              traj.controls.begin() + ke);
    const double measured = jerk_cost(held, traj.step());
    const PlanarState entry = planar_from_state(traj.states[k0]);
    const QuinticCoeffs qx = solve_quintic(entry.x, task.target[0], task.horizon);
    const QuinticCoeffs qy = solve_quintic(entry.y, task.target[1], task.horizon);
    const double optimum = jerk_cost(
        [&](double t) {
          Eigen::VectorXd j(2);
          j << qx.jerk(t), qy.jerk(t);
          return j;
        },
        task.horizon);

    v.cost.value = measured;
    if (miss > params.endpoint_tol) {
      std::ostringstream msg;
      msg << "endpoint miss " << miss << " at the horizon";
      v.pass = false;
      v.reason = msg.str();
      return v;
    }
    v.cost.completion_time = task.horizon;
    if (measured > optimum * (1.0 + params.cost_rel_tol) + 1e-9) {
      std::ostringstream msg;
      msg << "jerk cost " << measured << " vs optimum " << optimum;
      v.pass = false;
      v.reason = msg.str();
      return v;
    }
    v.pass = true;
    v.reason = "ok";
    return v;
  };
}

}  // namespace delaylab
