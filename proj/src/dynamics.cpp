#include "delaylab/dynamics.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "delaylab/errors.hpp"

namespace delaylab {

namespace {

// Number of integration steps over a span: exact multiples of h keep
// every step at exactly h (so a replay of recorded steps is
// bit-identical); otherwise the last step is shortened.
int step_count(double span, double h) {
  if (span <= 0.0) return 0;
  const double ratio = span / h;
  const auto near = static_cast<double>(std::llround(ratio));
  if (near > 0.0 && std::abs(ratio - near) < 1e-9) {
    return static_cast<int>(near);
  }
  return static_cast<int>(std::ceil(ratio));
}

Control clamp_box(const Control& u, bool* touched) {
  Control out = u;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (out[i] > 1.0) {
      out[i] = 1.0;
      if (touched) *touched = true;
    } else if (out[i] < -1.0) {
      out[i] = -1.0;
      if (touched) *touched = true;
    }
  }
  return out;
}

void append_value(std::string& row, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  row += buf;
}

}  // namespace

ControlSignal constant_control(const Control& u) {
  return [u](double) { return u; };
}

ControlSignal constant_control(double u) {
  Control v(1);
  v[0] = u;
  return constant_control(v);
}

void LinearSystem::validate() const {
  if (M.rows() != M.cols()) {
    throw std::invalid_argument("LinearSystem: M must be square");
  }
  if (N.rows() != M.rows()) {
    throw std::invalid_argument("LinearSystem: N must have as many rows as M");
  }
  if (M.rows() < 1 || N.cols() < 1) {
    throw std::invalid_argument("LinearSystem: empty system");
  }
}

PlantDynamics scalar_linear_plant() {
  PlantDynamics dyn;
  dyn.state_dim = 1;
  dyn.control_dim = 1;
  dyn.bounded_controls = true;
  dyn.f = [](const State& x, const Control& u) {
    State dx(1);
    dx[0] = -x[0] + u[0];
    return dx;
  };
  return dyn;
}

PlantDynamics linear_plant(const LinearSystem& sys) {
  sys.validate();
  PlantDynamics dyn;
  dyn.state_dim = sys.n();
  dyn.control_dim = sys.m();
  dyn.bounded_controls = true;
  dyn.f = [M = sys.M, N = sys.N](const State& x, const Control& u) -> State {
    return M * x + N * u;
  };
  return dyn;
}

PlantDynamics min_jerk_plant() {
  // State (x, y, xd, yd, xdd, ydd), controls are the two jerks.
  PlantDynamics dyn;
  dyn.state_dim = 6;
  dyn.control_dim = 2;
  dyn.bounded_controls = false;
  dyn.f = [](const State& x, const Control& u) {
    State dx(6);
    dx[0] = x[2];
    dx[1] = x[3];
    dx[2] = x[4];
    dx[3] = x[5];
    dx[4] = u[0];
    dx[5] = u[1];
    return dx;
  };
  return dyn;
}

double Trajectory::step() const {
  if (times.size() < 2) return 0.0;
  return times[1] - times[0];
}

std::size_t Trajectory::index_at(double t) const {
  if (times.empty()) {
    throw std::invalid_argument("Trajectory: empty");
  }
  if (times.size() == 1) return 0;
  const double h = step();
  auto idx = std::llround((t - times.front()) / h);
  if (idx < 0) idx = 0;
  const auto last = static_cast<long long>(times.size()) - 1;
  if (idx > last) idx = last;
  return static_cast<std::size_t>(idx);
}

const State& Trajectory::state_at(double t) const { return states[index_at(t)]; }

void Trajectory::write_csv(std::ostream& out) const {
  const int n = states.empty() ? 0 : static_cast<int>(states.front().size());
  const int m = controls.empty() ? 0 : static_cast<int>(controls.front().size());
  std::string row = "t";
  for (int i = 1; i <= n; ++i) row += ",x" + std::to_string(i);
  for (int i = 1; i <= m; ++i) row += ",u" + std::to_string(i);
  out << row << '\n';
  for (std::size_t k = 0; k < times.size(); ++k) {
    row.clear();
    append_value(row, times[k]);
    for (int i = 0; i < n; ++i) {
      row += ',';
      append_value(row, states[k][i]);
    }
    if (m > 0) {
      // Row k carries the control held from times[k]; the final row
      // repeats the last held value.
      const auto ci = k < controls.size() ? k : controls.size() - 1;
      for (int i = 0; i < m; ++i) {
        row += ',';
        append_value(row, controls[ci][i]);
      }
    }
    out << row << '\n';
  }
}

void Trajectory::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("Trajectory: cannot open " + path);
  }
  write_csv(out);
}

State rk4_step(const PlantDynamics& dyn, const State& x, const Control& u,
               double h) {
  const State k1 = dyn.f(x, u);
  const State k2 = dyn.f(x + (h / 2.0) * k1, u);
  const State k3 = dyn.f(x + (h / 2.0) * k2, u);
  const State k4 = dyn.f(x + h * k3, u);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory integrate_plant(const PlantDynamics& dyn, const State& x0,
                           const ControlSignal& u, double t0, double t1,
                           double h) {
  if (!(h > 0.0)) {
    throw std::invalid_argument("integrate_plant: step must be positive");
  }
  if (t1 < t0) {
    throw std::invalid_argument("integrate_plant: t1 must not precede t0");
  }
  if (x0.size() != dyn.state_dim) {
    throw std::invalid_argument("integrate_plant: state dimension mismatch");
  }
  if (!x0.allFinite()) {
    throw std::invalid_argument("integrate_plant: non-finite initial state");
  }

  const int steps = step_count(t1 - t0, h);
  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.controls.reserve(steps);
  traj.times.push_back(t0);
  traj.states.push_back(x0);

  State x = x0;
  for (int k = 0; k < steps; ++k) {
    const double tk = t0 + static_cast<double>(k) * h;
    const bool last = k == steps - 1;
    const double dt = last ? t1 - tk : h;
    Control uk = u(tk);
    if (uk.size() != dyn.control_dim) {
      throw std::invalid_argument("integrate_plant: control dimension mismatch");
    }
    if (dyn.bounded_controls) {
      uk = clamp_box(uk, &traj.controls_clamped);
    }
    x = rk4_step(dyn, x, uk, dt);
    const double tn = last ? t1 : tk + h;
    if (!x.allFinite()) {
      std::ostringstream msg;
      msg << "integration diverged at t = " << tn;
      throw DivergenceError(msg.str(), tn);
    }
    traj.times.push_back(tn);
    traj.states.push_back(x);
    traj.controls.push_back(uk);
  }
  return traj;
}

Eigen::MatrixXd linear_transition(const LinearSystem& sys, double t) {
  sys.validate();
  return (t * sys.M).exp();
}

State linear_solve(const LinearSystem& sys, const State& x0,
                   const ControlSignal& u, double t, double quad_step) {
  sys.validate();
  if (x0.size() != sys.n()) {
    throw std::invalid_argument("linear_solve: state dimension mismatch");
  }
  if (!(quad_step > 0.0)) {
    throw std::invalid_argument("linear_solve: step must be positive");
  }
  if (t < 0.0) {
    throw std::invalid_argument("linear_solve: negative time");
  }

  State acc = State::Zero(sys.n());
  const int steps = step_count(t, quad_step);
  // One Simpson panel per hold interval: the kernel e^{(t-s)M} is
  // smooth inside each interval even when u jumps between them.
  for (int k = 0; k < steps; ++k) {
    const double a = static_cast<double>(k) * quad_step;
    const bool last = k == steps - 1;
    const double b = last ? t : a + quad_step;
    const double mid = 0.5 * (a + b);
    Control uk = u(a);
    if (uk.size() != sys.m()) {
      throw std::invalid_argument("linear_solve: control dimension mismatch");
    }
    const Eigen::MatrixXd ka = ((t - a) * sys.M).exp() * sys.N;
    const Eigen::MatrixXd km = ((t - mid) * sys.M).exp() * sys.N;
    const Eigen::MatrixXd kb = ((t - b) * sys.M).exp() * sys.N;
    acc += ((b - a) / 6.0) * ((ka + 4.0 * km + kb) * uk);
  }
  return linear_transition(sys, t) * x0 + acc;
}

NormalityReport normality_check(const LinearSystem& sys) {
  sys.validate();
  const int n = sys.n();
  NormalityReport report;
  report.normal = true;
  for (int j = 0; j < sys.m(); ++j) {
    Eigen::MatrixXd krylov(n, n);
    Eigen::VectorXd col = sys.N.col(j);
    for (int p = 0; p < n; ++p) {
      krylov.col(p) = col;
      col = sys.M * col;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(krylov);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    const bool ok = smax > 0.0 && smin > 1e-9 * smax;
    report.column_ok.push_back(ok);
    report.normal = report.normal && ok;
  }
  return report;
}

}  // namespace delaylab
