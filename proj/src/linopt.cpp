#include "delaylab/linopt.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "delaylab/errors.hpp"

namespace delaylab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double sgn_plus(double v) { return v >= 0.0 ? 1.0 : -1.0; }

Eigen::Vector2d angle_dir(double theta) {
  return {std::cos(theta), std::sin(theta)};
}

// Golden-section search for the maximum of f on [a, b].
template <typename F>
double golden_max(F&& f, double a, double b, int iters = 60) {
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

void require_planar_or_line(const LinearSystem& sys, const char* who) {
  if (sys.n() > 2) {
    std::ostringstream msg;
    msg << who << ": only state dimensions 1 and 2 are supported";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

ReachableSet::ReachableSet(LinearSystem sys, State origin, double horizon,
                           double quad_step)
    : sys_(std::move(sys)), origin_(std::move(origin)), horizon_(horizon),
      quad_step_(quad_step) {
  sys_.validate();
  if (origin_.size() != sys_.n()) {
    throw std::invalid_argument("ReachableSet: origin dimension mismatch");
  }
  if (horizon_ < 0.0) {
    throw std::invalid_argument("ReachableSet: negative horizon");
  }
  if (!(quad_step_ > 0.0)) {
    throw std::invalid_argument("ReachableSet: step must be positive");
  }

  base_ = (horizon_ * sys_.M).exp() * origin_;
  if (horizon_ == 0.0) return;

  const int steps =
      std::max(1, static_cast<int>(std::ceil(horizon_ / quad_step_ - 1e-12)));
  const double panel = horizon_ / steps;
  const int nodes = 2 * steps + 1;

  // Simpson weights: panel/6 at panel edges (shared edges add up),
  // 4 panel/6 at midpoints.
  weights_.assign(nodes, 0.0);
  for (int k = 0; k < steps; ++k) {
    weights_[2 * k] += panel / 6.0;
    weights_[2 * k + 1] += 4.0 * panel / 6.0;
    weights_[2 * k + 2] += panel / 6.0;
  }

  // Kernels e^{(t-s)M} N at the nodes, filled backwards from s = t by
  // repeated half-panel transitions.
  kernel_.assign(nodes, Eigen::MatrixXd());
  const Eigen::MatrixXd half = ((panel / 2.0) * sys_.M).exp();
  Eigen::MatrixXd cur = sys_.N;
  kernel_[nodes - 1] = cur;
  for (int k = nodes - 2; k >= 0; --k) {
    cur = half * cur;
    kernel_[k] = cur;
  }
}

double ReachableSet::support(const Eigen::VectorXd& g) const {
  if (g.size() != sys_.n()) {
    throw std::invalid_argument("ReachableSet: direction dimension mismatch");
  }
  double h = g.dot(base_);
  for (std::size_t k = 0; k < kernel_.size(); ++k) {
    h += weights_[k] * (g.transpose() * kernel_[k]).cwiseAbs().sum();
  }
  return h;
}

State ReachableSet::support_point(const Eigen::VectorXd& g) const {
  if (g.size() != sys_.n()) {
    throw std::invalid_argument("ReachableSet: direction dimension mismatch");
  }
  State p = base_;
  for (std::size_t k = 0; k < kernel_.size(); ++k) {
    const Eigen::RowVectorXd sw = g.transpose() * kernel_[k];
    Eigen::VectorXd u(sw.size());
    for (Eigen::Index j = 0; j < sw.size(); ++j) u[j] = sgn_plus(sw[j]);
    p += weights_[k] * (kernel_[k] * u);
  }
  return p;
}

void ReachableSet::write_boundary_csv(std::ostream& out, int angle_samples) const {
  char buf[128];
  if (dim() == 1) {
    Eigen::VectorXd plus(1), minus(1);
    plus << 1.0;
    minus << -1.0;
    out << "lo,hi\n";
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", -support(minus),
                  support(plus));
    out << buf;
    return;
  }
  if (dim() != 2) {
    throw std::invalid_argument("ReachableSet: boundary export needs n <= 2");
  }
  out << "theta,x,y\n";
  for (int i = 0; i < angle_samples; ++i) {
    const double theta = kTwoPi * i / angle_samples;
    const State p = support_point(angle_dir(theta));
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", theta, p[0], p[1]);
    out << buf;
  }
}

double support(const LinearSystem& sys, const State& x0, double t,
               const Eigen::VectorXd& g) {
  return ReachableSet(sys, x0, t).support(g);
}

SeparationCertificate separation(const ReachableSet& K1, const ReachableSet& K2,
                                 int angle_grid) {
  if (K1.dim() != K2.dim()) {
    throw std::invalid_argument("separation: dimension mismatch");
  }
  require_planar_or_line(K1.system(), "separation");
  if (angle_grid < 8) angle_grid = 8;

  const auto margin = [&](const Eigen::VectorXd& g) {
    return -(K1.support(g) + K2.support(-g));
  };

  SeparationCertificate cert;
  if (K1.dim() == 1) {
    Eigen::VectorXd plus(1), minus(1);
    plus << 1.0;
    minus << -1.0;
    const double mp = margin(plus);
    const double mm = margin(minus);
    cert.direction = mp >= mm ? plus : minus;
    cert.margin = std::max(mp, mm);
    cert.disjoint = cert.margin > 0.0;
    return cert;
  }

  const auto margin_at = [&](double theta) { return margin(angle_dir(theta)); };
  double best_theta = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < angle_grid; ++i) {
    const double theta = kTwoPi * i / angle_grid;
    const double m = margin_at(theta);
    if (m > best) {
      best = m;
      best_theta = theta;
    }
  }
  const double span = kTwoPi / angle_grid;
  const double refined =
      golden_max(margin_at, best_theta - span, best_theta + span);
  if (margin_at(refined) > best) {
    best = margin_at(refined);
    best_theta = refined;
  }
  cert.direction = angle_dir(best_theta);
  cert.margin = best;
  cert.disjoint = best > 0.0;
  return cert;
}

TouchingPoint tau_m(const LinearSystem& sys, const State& x1, const State& x2,
                    double tol, double quad_step, double max_horizon) {
  sys.validate();
  require_planar_or_line(sys, "tau_m");
  if (x1.size() != sys.n() || x2.size() != sys.n()) {
    throw std::invalid_argument("tau_m: state dimension mismatch");
  }
  if ((x1 - x2).lpNorm<Eigen::Infinity>() == 0.0) {
    throw std::invalid_argument("tau_m: states must be distinct");
  }
  if (!normality_check(sys).normal) {
    throw std::invalid_argument("tau_m: system is not normal");
  }
  if (!(tol > 0.0)) {
    throw std::invalid_argument("tau_m: tolerance must be positive");
  }

  const auto disjoint_at = [&](double t) {
    const ReachableSet K1(sys, x1, t, quad_step);
    const ReachableSet K2(sys, x2, t, quad_step);
    return separation(K1, K2).disjoint;
  };

  // Grow the bracket until the sets meet, then bisect.
  double lo = 0.0;
  double hi = 1.0;
  while (disjoint_at(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > max_horizon) {
      throw HorizonError("tau_m: sets remained disjoint within the horizon");
    }
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (disjoint_at(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  TouchingPoint out;
  out.tau = 0.5 * (lo + hi);
  // At the last disjoint instant the facing boundary points along the
  // separating direction pinch toward the single contact point.
  const ReachableSet K1(sys, x1, lo, quad_step);
  const ReachableSet K2(sys, x2, lo, quad_step);
  const SeparationCertificate cert = separation(K1, K2);
  out.x_star =
      0.5 * (K1.support_point(cert.direction) + K2.support_point(-cert.direction));
  return out;
}

Control extremal_control(const LinearSystem& sys, const Eigen::VectorXd& eta,
                         double tau_star, double t) {
  sys.validate();
  if (eta.size() != sys.n()) {
    throw std::invalid_argument("extremal_control: direction dimension mismatch");
  }
  const Eigen::RowVectorXd sw =
      eta.transpose() * ((tau_star - t) * sys.M).exp() * sys.N;
  Control u(sys.m());
  for (Eigen::Index j = 0; j < sw.size(); ++j) u[j] = sgn_plus(sw[j]);
  return u;
}

namespace {

struct Shot {
  double miss = std::numeric_limits<double>::infinity();
  std::vector<Control> controls;
  std::vector<State> states;
};

// Endpoint miss of the extremal trajectory for terminal direction eta,
// using precomputed switching kernels e^{(tau-t_k)M} N.
Shot shoot(const PlantDynamics& dyn, const State& x0, const State& x_star,
           const std::vector<Eigen::MatrixXd>& kernels,
           const Eigen::VectorXd& eta, double step, bool keep) {
  Shot shot;
  State x = x0;
  if (keep) shot.states.push_back(x);
  for (const auto& kernel : kernels) {
    const Eigen::RowVectorXd sw = eta.transpose() * kernel;
    Control u(sw.size());
    for (Eigen::Index j = 0; j < sw.size(); ++j) u[j] = sgn_plus(sw[j]);
    x = rk4_step(dyn, x, u, step);
    if (keep) {
      shot.controls.push_back(std::move(u));
      shot.states.push_back(x);
    }
  }
  shot.miss = (x - x_star).lpNorm<Eigen::Infinity>();
  return shot;
}

}  // namespace

SynthesisResult synthesize_time_optimal(const LinearSystem& sys, const State& x0,
                                        const State& x_star,
                                        const SynthesisOptions& opts) {
  sys.validate();
  require_planar_or_line(sys, "synthesize_time_optimal");
  if (x0.size() != sys.n() || x_star.size() != sys.n()) {
    throw std::invalid_argument(
        "synthesize_time_optimal: state dimension mismatch");
  }
  if (!normality_check(sys).normal) {
    throw std::invalid_argument("synthesize_time_optimal: system is not normal");
  }

  SynthesisResult result;
  if ((x_star - x0).lpNorm<Eigen::Infinity>() <= 1e-12) {
    result.tau = 0.0;
    result.eta = Eigen::VectorXd::Zero(sys.n());
    result.control = ControlSegment(opts.step, {});
    result.trajectory.times.push_back(0.0);
    result.trajectory.states.push_back(x0);
    return result;
  }

  // Arrival time: first tau with x_star inside K(tau, x0), found by
  // bisection on support-function membership over a direction grid.
  const auto member = [&](double tau) {
    const ReachableSet K(sys, x0, tau, opts.step);
    if (sys.n() == 1) {
      Eigen::VectorXd plus(1), minus(1);
      plus << 1.0;
      minus << -1.0;
      return K.support(plus) - x_star[0] >= 0.0 &&
             K.support(minus) + x_star[0] >= 0.0;
    }
    for (int i = 0; i < opts.eta_grid; ++i) {
      const Eigen::Vector2d g = angle_dir(kTwoPi * i / opts.eta_grid);
      if (K.support(g) - g.dot(x_star) < 0.0) return false;
    }
    return true;
  };

  double lo = 0.0;
  double hi = 1.0;
  while (!member(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > opts.max_horizon) {
      throw HorizonError(
          "synthesize_time_optimal: target unreachable within the horizon");
    }
  }
  while (hi - lo > opts.tau_tol) {
    const double mid = 0.5 * (lo + hi);
    if (member(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  const double tau = hi;  // certified member

  // Terminal direction: shoot extremal controls over the direction
  // grid, then polish the best angle by golden section on the miss.
  const int steps =
      std::max(1, static_cast<int>(std::ceil(tau / opts.step - 1e-12)));
  const double step = tau / steps;
  std::vector<Eigen::MatrixXd> kernels;
  kernels.reserve(steps);
  const Eigen::MatrixXd half = (step * sys.M).exp();
  Eigen::MatrixXd cur = ((tau - (steps - 1) * step) * sys.M).exp() * sys.N;
  // kernels[k] = e^{(tau - k step)M} N, built from the last step back.
  std::vector<Eigen::MatrixXd> rev;
  rev.push_back(cur);
  for (int k = steps - 2; k >= 0; --k) {
    cur = half * cur;
    rev.push_back(cur);
  }
  for (auto it = rev.rbegin(); it != rev.rend(); ++it) kernels.push_back(*it);

  const PlantDynamics dyn = linear_plant(sys);
  Eigen::VectorXd best_eta;
  double best_miss = std::numeric_limits<double>::infinity();
  if (sys.n() == 1) {
    for (double sign : {1.0, -1.0}) {
      Eigen::VectorXd eta(1);
      eta << sign;
      const Shot s = shoot(dyn, x0, x_star, kernels, eta, step, false);
      if (s.miss < best_miss) {
        best_miss = s.miss;
        best_eta = eta;
      }
    }
  } else {
    double best_theta = 0.0;
    for (int i = 0; i < opts.eta_grid; ++i) {
      const double theta = kTwoPi * i / opts.eta_grid;
      const Shot s = shoot(dyn, x0, x_star, kernels, angle_dir(theta), step, false);
      if (s.miss < best_miss) {
        best_miss = s.miss;
        best_theta = theta;
      }
    }
    const double span = kTwoPi / opts.eta_grid;
    const double refined = golden_max(
        [&](double theta) {
          return -shoot(dyn, x0, x_star, kernels, angle_dir(theta), step, false)
                      .miss;
        },
        best_theta - span, best_theta + span);
    const Shot s = shoot(dyn, x0, x_star, kernels, angle_dir(refined), step, false);
    if (s.miss < best_miss) {
      best_miss = s.miss;
      best_theta = refined;
    }
    best_eta = angle_dir(best_theta);
  }

  if (best_miss > opts.landing_tol) {
    std::ostringstream msg;
    msg << "synthesize_time_optimal: best landing miss " << best_miss
        << " exceeds tolerance " << opts.landing_tol;
    throw std::runtime_error(msg.str());
  }

  Shot final_shot = shoot(dyn, x0, x_star, kernels, best_eta, step, true);
  result.tau = tau;
  result.eta = best_eta;
  result.control = ControlSegment(step, final_shot.controls);
  result.trajectory.states = std::move(final_shot.states);
  result.trajectory.controls = std::move(final_shot.controls);
  result.trajectory.times.resize(steps + 1);
  for (int k = 0; k <= steps; ++k) {
    result.trajectory.times[k] = k == steps ? tau : k * step;
  }
  return result;
}

}  // namespace delaylab
