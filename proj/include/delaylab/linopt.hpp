#pragma once

#include <iosfwd>

#include "delaylab/delay.hpp"
#include "delaylab/dynamics.hpp"

namespace delaylab {

/// Reachable set K(t, x0) of xdot = M x + N u, |u_j| <= 1, represented
/// by its support function
///   h(g) = g . e^{tM} x0 + int_0^t sum_j |g^T e^{(t-s)M} N^j| ds.
/// The transition kernels at the quadrature nodes are precomputed once
/// so sweeping many directions costs only dot products.
class ReachableSet {
 public:
  ReachableSet(LinearSystem sys, State origin, double horizon,
               double quad_step = 1e-3);

  double support(const Eigen::VectorXd& g) const;

  /// Boundary point attaining the support in direction g (bang controls
  /// u_j = sgn(g^T e^{(t-s)M} N^j) pushed through the same quadrature).
  State support_point(const Eigen::VectorXd& g) const;

  int dim() const { return sys_.n(); }
  double horizon() const { return horizon_; }
  const State& origin() const { return origin_; }
  const LinearSystem& system() const { return sys_; }

  /// n = 1: single row "lo,hi". n = 2: rows "theta,x,y" tracing the
  /// boundary polyline by support points over an angle sweep.
  void write_boundary_csv(std::ostream& out, int angle_samples = 360) const;

 private:
  LinearSystem sys_;
  State origin_;
  double horizon_;
  double quad_step_;
  Eigen::VectorXd base_;                 // e^{tM} x0
  std::vector<double> weights_;          // Simpson weights per node
  std::vector<Eigen::MatrixXd> kernel_;  // e^{(t-s)M} N per node
};

double support(const LinearSystem& sys, const State& x0, double t,
               const Eigen::VectorXd& g);

struct SeparationCertificate {
  bool disjoint = false;
  Eigen::VectorXd direction;  ///< best separating direction found
  double margin = 0.0;        ///< -(h1(g) + h2(-g)) at that direction
};

/// Searches for a hyperplane with K1 strictly on one side and K2 on the
/// other: disjoint iff max_g -(h1(g) + h2(-g)) > 0. Directions are
/// +-1 for n = 1 and an angle grid with golden-section refinement for
/// n = 2. Only n <= 2 is supported.
SeparationCertificate separation(const ReachableSet& K1, const ReachableSet& K2,
                                 int angle_grid = 720);

struct TouchingPoint {
  double tau = 0.0;  ///< last instant the two reachable sets are disjoint
  State x_star;      ///< approximate single contact point at that instant
};

/// Bisects on the disjointness of K(tau, x1) and K(tau, x2) (bracket
/// grown by doubling from 1 s) down to `tol` seconds. Requires a normal
/// system, distinct starts, and n <= 2. x_star is the midpoint of the
/// facing support points along the final separating direction.
TouchingPoint tau_m(const LinearSystem& sys, const State& x1, const State& x2,
                    double tol = 1e-4, double quad_step = 1e-3,
                    double max_horizon = 64.0);

/// Bang-bang extremal input u_j = sgn(eta^T e^{(tau_star - t)M} N^j),
/// with sgn(0) = +1 by convention so the control is always defined.
Control extremal_control(const LinearSystem& sys, const Eigen::VectorXd& eta,
                         double tau_star, double t);

struct SynthesisOptions {
  int eta_grid = 1024;        ///< terminal-direction samples (n = 2)
  double landing_tol = 1e-3;  ///< accepted endpoint miss
  double tau_tol = 1e-4;
  double step = 1e-3;
  double max_horizon = 64.0;
};

struct SynthesisResult {
  double tau = 0.0;
  Eigen::VectorXd eta;
  ControlSegment control;  ///< held on the integration grid
  Trajectory trajectory;
};

/// Minimum-time steering x0 -> x_star. The arrival time comes from
/// bisecting membership of x_star in K(tau, x0); the terminal direction
/// is chosen by shooting extremal controls over the direction grid and
/// refining the best angle by golden section. Throws HorizonError when
/// the target stays outside every K(tau) up to max_horizon, and
/// std::runtime_error when no shot lands within landing_tol.
SynthesisResult synthesize_time_optimal(const LinearSystem& sys, const State& x0,
                                        const State& x_star,
                                        const SynthesisOptions& opts = {});

}  // namespace delaylab
