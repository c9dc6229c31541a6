#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace delaylab {

using State = Eigen::VectorXd;
using Control = Eigen::VectorXd;

/// Control signal as a function of time. Integrators sample it at the
/// start of each step and hold the value over the step (zero-order hold).
using ControlSignal = std::function<Control(double)>;

ControlSignal constant_control(const Control& u);
ControlSignal constant_control(double u);

/// Continuous-time plant xdot = f(x, u) with fixed dimensions.
/// When bounded_controls is set, every control component is clamped
/// to [-1, 1] before it is applied.
struct PlantDynamics {
  int state_dim = 0;
  int control_dim = 0;
  bool bounded_controls = true;
  std::function<State(const State&, const Control&)> f;
};

/// Linear time-invariant pair (M, N): xdot = M x + N u.
struct LinearSystem {
  Eigen::MatrixXd M;
  Eigen::MatrixXd N;

  int n() const { return static_cast<int>(M.rows()); }
  int m() const { return static_cast<int>(N.cols()); }

  /// Throws std::invalid_argument if M is not square or row counts differ.
  void validate() const;
};

// Built-in plants.
PlantDynamics scalar_linear_plant();              ///< xdot = -x + u, u in [-1,1]
PlantDynamics linear_plant(const LinearSystem&);  ///< bounded box controls
PlantDynamics min_jerk_plant();  ///< planar triple integrator, jerk input, unbounded

/// Sampled solution of one closed- or open-loop run.
///
/// times is a uniform grid of step() seconds (the last step may be
/// shorter when the span is not a multiple of the step); states aligns
/// with times; controls[k] is the value held on [times[k], times[k+1])
/// so controls has one entry fewer than states.
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<Control> controls;
  bool controls_clamped = false;

  double step() const;
  double begin_time() const { return times.front(); }
  double end_time() const { return times.back(); }
  std::size_t index_at(double t) const;  ///< nearest grid point
  const State& state_at(double t) const;

  /// Header t,x1..xn,u1..um; one row per grid point with the control of
  /// the surrounding hold interval (final row repeats the last control);
  /// 17 significant digits throughout.
  void write_csv(std::ostream& out) const;
  void write_csv(const std::string& path) const;
};

/// One classic fourth-order Runge-Kutta step of length h with u held
/// constant. Exposed so closed-loop drivers and model-based predictors
/// share the exact same update and stay bit-identical.
State rk4_step(const PlantDynamics& dyn, const State& x, const Control& u, double h);

/// Fixed-step RK4 over [t0, t1]. The control signal is sampled at each
/// step start and held. Throws DivergenceError when a state goes
/// non-finite, naming the failure time.
Trajectory integrate_plant(const PlantDynamics& dyn, const State& x0,
                           const ControlSignal& u, double t0, double t1,
                           double h);

/// State transition matrix e^{tM}.
Eigen::MatrixXd linear_transition(const LinearSystem& sys, double t);

/// Analytic solution by variation of constants,
///   x_t = e^{tM} x0 + int_0^t e^{(t-s)M} N u_s ds,
/// with the integral done by composite Simpson, one panel per hold
/// interval of length quad_step. Serves as the independent cross-check
/// for the RK4 path.
State linear_solve(const LinearSystem& sys, const State& x0,
                   const ControlSignal& u, double t, double quad_step = 1e-3);

struct NormalityReport {
  std::vector<bool> column_ok;  ///< per input column of N
  bool normal = false;          ///< all columns pass

  explicit operator bool() const { return normal; }
};

/// A column j passes when {N^j, M N^j, ..., M^{n-1} N^j} has full rank,
/// judged by SVD with threshold sigma_min > 1e-9 * sigma_max.
NormalityReport normality_check(const LinearSystem& sys);

}  // namespace delaylab
