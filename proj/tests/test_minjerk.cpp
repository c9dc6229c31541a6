#include "delaylab/minjerk.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "delaylab/dynamics.hpp"

namespace {

using namespace delaylab;

// Independent reference: solve all six coefficients from the full 6x6
// boundary-condition system instead of the reduced 3x3 used by the
// library.
QuinticCoeffs dense_quintic(const AxisState& init, double target, double T) {
  Eigen::Matrix<double, 6, 6> A = Eigen::Matrix<double, 6, 6>::Zero();
  A(0, 0) = 1.0;
  A(1, 1) = 1.0;
  A(2, 2) = 2.0;
  for (int j = 0; j < 6; ++j) {
    A(3, j) = std::pow(T, j);
    if (j >= 1) A(4, j) = j * std::pow(T, j - 1);
    if (j >= 2) A(5, j) = j * (j - 1) * std::pow(T, j - 2);
  }
  Eigen::Matrix<double, 6, 1> b;
  b << init.position, init.velocity, init.acceleration, target, 0.0, 0.0;
  const Eigen::Matrix<double, 6, 1> c = A.fullPivLu().solve(b);
  QuinticCoeffs q;
  for (int j = 0; j < 6; ++j) q.a[j] = c[j];
  return q;
}

AxisState random_axis(std::mt19937& rng) {
  std::uniform_real_distribution<double> span(-2.0, 2.0);
  return AxisState{span(rng), span(rng), span(rng)};
}

TEST(Quintic, RestToRestUnitMove) {
  const auto q = solve_quintic(AxisState{}, 1.0, 1.0);
  const double expected[6] = {0.0, 0.0, 0.0, 10.0, -15.0, 6.0};
  for (int j = 0; j < 6; ++j) {
    EXPECT_NEAR(q.a[j], expected[j], 1e-10) << "a" << j;
  }
  EXPECT_NEAR(q.jerk(0.0), 60.0, 1e-9);
  EXPECT_NEAR(initial_jerk(AxisState{}, 1.0, 1.0), 60.0, 1e-12);
}

TEST(Quintic, CostOfTheUnitMoveAndItsStretch) {
  const auto unit = solve_quintic(AxisState{}, 1.0, 1.0);
  const auto cost = [](const QuinticCoeffs& q, double T) {
    return jerk_cost(
        [&q](double t) { return Eigen::VectorXd::Constant(1, q.jerk(t)); }, T);
  };
  EXPECT_NEAR(cost(unit, 1.0), 360.0, 1e-8);
  const auto slow = solve_quintic(AxisState{}, 1.0, 2.0);
  EXPECT_NEAR(cost(slow, 2.0), 11.25, 1e-8);
}

TEST(Quintic, MatchesTheDenseSolveOnRandomBoundaries) {
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> horizon(0.3, 3.0);
  std::uniform_real_distribution<double> span(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const AxisState init = random_axis(rng);
    const double target = span(rng);
    const double T = horizon(rng);
    const auto q = solve_quintic(init, target, T);
    const auto ref = dense_quintic(init, target, T);
    for (int j = 0; j < 6; ++j) {
      const double tol = 1e-9 * std::max(1.0, std::abs(ref.a[j]));
      EXPECT_NEAR(q.a[j], ref.a[j], tol) << "trial " << trial << " a" << j;
    }
  }
}

TEST(Quintic, SatisfiesItsBoundaryConditions) {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> horizon(0.3, 3.0);
  std::uniform_real_distribution<double> span(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const AxisState init = random_axis(rng);
    const double target = span(rng);
    const double T = horizon(rng);
    const auto q = solve_quintic(init, target, T);
    EXPECT_NEAR(q.position(0.0), init.position, 1e-12);
    EXPECT_NEAR(q.velocity(0.0), init.velocity, 1e-12);
    EXPECT_NEAR(q.acceleration(0.0), init.acceleration, 1e-12);
    EXPECT_NEAR(q.position(T), target, 1e-9) << "trial " << trial;
    EXPECT_NEAR(q.velocity(T), 0.0, 1e-9) << "trial " << trial;
    EXPECT_NEAR(q.acceleration(T), 0.0, 1e-9) << "trial " << trial;
    EXPECT_NEAR(q.jerk(0.0), initial_jerk(init, target, T),
                1e-9 * std::max(1.0, std::abs(q.jerk(0.0))));
  }
}

TEST(Quintic, ReplanningMidCourseChangesNothing) {
  // Following the optimal plan and re-solving from the state reached at
  // s must reproduce the tail of the original plan.
  const auto q = solve_quintic(AxisState{}, 1.0, 1.0);
  const double s = 0.5;
  const AxisState mid{q.position(s), q.velocity(s), q.acceleration(s)};
  EXPECT_NEAR(mid.position, 0.5, 1e-12);
  EXPECT_NEAR(mid.velocity, 1.875, 1e-12);
  EXPECT_NEAR(mid.acceleration, 0.0, 1e-12);
  const auto tail = solve_quintic(mid, 1.0, 1.0 - s);
  EXPECT_NEAR(tail.jerk(0.0), -30.0, 1e-9);
  for (double t = 0.0; t <= 0.5 + 1e-12; t += 0.05) {
    EXPECT_NEAR(tail.position(t), q.position(s + t), 1e-9) << "t " << t;
    EXPECT_NEAR(tail.jerk(t), q.jerk(s + t), 1e-6) << "t " << t;
  }
}

TEST(Quintic, RejectsNonPositiveHorizons) {
  EXPECT_THROW(solve_quintic(AxisState{}, 1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(solve_quintic(AxisState{}, 1.0, -1.0), std::invalid_argument);
  EXPECT_THROW(initial_jerk(AxisState{}, 1.0, 0.0), std::invalid_argument);
}

TEST(FixedHorizonCoincidence, KnownPair) {
  const AxisState a{};
  const AxisState b{3.0, -5.0, 0.0};
  // 60 dx + 36 T dv vanishes at T = 1 and only there.
  EXPECT_TRUE(nsctp_fixed_T(a, b, 1.0));
  EXPECT_FALSE(nsctp_fixed_T(a, b, 2.0));
  EXPECT_FALSE(nsctp_fixed_T(a, b, 0.5));
  const double gap = initial_jerk(a, 0.7, 2.0) - initial_jerk(b, 0.7, 2.0);
  EXPECT_NEAR(gap, -22.5, 1e-9);
  // The gap does not depend on the target.
  EXPECT_NEAR(initial_jerk(a, -1.3, 2.0) - initial_jerk(b, -1.3, 2.0), gap,
              1e-12);
}

TEST(FixedHorizonCoincidence, RejectsDegenerateInput) {
  const AxisState a{1.0, 2.0, 3.0};
  EXPECT_THROW(nsctp_fixed_T(a, a, 1.0), std::invalid_argument);
  EXPECT_THROW(nsctp_fixed_T(a, AxisState{}, 0.0), std::invalid_argument);
  EXPECT_THROW(separating_time(a, a), std::invalid_argument);
}

TEST(SeparatingTime, LinearCoincidenceRoot) {
  const auto st = separating_time(AxisState{}, AxisState{3.0, -5.0, 0.0});
  ASSERT_EQ(st.roots.size(), 1u);
  EXPECT_NEAR(st.roots[0], 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(st.chosen_T, 2.0);
  EXPECT_NEAR(st.jerk_gap, -22.5, 1e-9);
}

TEST(SeparatingTime, NoRootFallsBackToOne) {
  const auto st = separating_time(AxisState{1.0, 0.0, 0.0}, AxisState{});
  EXPECT_TRUE(st.roots.empty());
  EXPECT_DOUBLE_EQ(st.chosen_T, 1.0);
  EXPECT_NEAR(st.jerk_gap, -60.0, 1e-12);
}

TEST(SeparatingTime, TwoRootQuadratic) {
  // Differences (dx, dv, da) = (0.3, -0.75, 1) give
  // 9 T^2 - 27 T + 18 = 9 (T - 1)(T - 2).
  const AxisState a{0.3, -0.75, 1.0};
  const auto st = separating_time(a, AxisState{});
  ASSERT_EQ(st.roots.size(), 2u);
  EXPECT_NEAR(st.roots[0], 1.0, 1e-9);
  EXPECT_NEAR(st.roots[1], 2.0, 1e-9);
  EXPECT_DOUBLE_EQ(st.chosen_T, 4.0);
  EXPECT_NEAR(st.jerk_gap,
              initial_jerk(a, 0.0, 4.0) - initial_jerk(AxisState{}, 0.0, 4.0),
              1e-12);
  EXPECT_TRUE(nsctp_fixed_T(a, AxisState{}, 1.0));
  EXPECT_TRUE(nsctp_fixed_T(a, AxisState{}, 2.0));
  EXPECT_FALSE(nsctp_fixed_T(a, AxisState{}, 4.0));
}

TEST(SeparatingTime, AlwaysFindsASeparatingHorizon) {
  std::mt19937 rng(43);
  std::uniform_real_distribution<double> span(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const AxisState a = random_axis(rng);
    AxisState b = random_axis(rng);
    if (a.position == b.position && a.velocity == b.velocity &&
        a.acceleration == b.acceleration) {
      b.position += 0.5;
    }
    const auto st = separating_time(a, b);
    EXPECT_GT(st.chosen_T, 0.0);
    EXPECT_GE(std::abs(st.jerk_gap), 1e-6) << "trial " << trial;
    // The gap is what the closed forms say, for any target.
    const double target = span(rng);
    EXPECT_NEAR(st.jerk_gap,
                initial_jerk(a, target, st.chosen_T) -
                    initial_jerk(b, target, st.chosen_T),
                1e-9 * std::max(1.0, std::abs(st.jerk_gap)))
        << "trial " << trial;
    for (double r : st.roots) {
      EXPECT_TRUE(nsctp_fixed_T(a, b, r)) << "trial " << trial;
      EXPECT_GT(r, 0.0);
    }
    EXPECT_FALSE(nsctp_fixed_T(a, b, st.chosen_T)) << "trial " << trial;
  }
}

TEST(PlanarState, RoundTripsThroughTheFlatState) {
  State s(6);
  s << 1.0, 2.0, 3.0, 4.0, 5.0, 6.0;
  const auto p = planar_from_state(s);
  EXPECT_DOUBLE_EQ(p.x.position, 1.0);
  EXPECT_DOUBLE_EQ(p.y.position, 2.0);
  EXPECT_DOUBLE_EQ(p.x.velocity, 3.0);
  EXPECT_DOUBLE_EQ(p.y.velocity, 4.0);
  EXPECT_DOUBLE_EQ(p.x.acceleration, 5.0);
  EXPECT_DOUBLE_EQ(p.y.acceleration, 6.0);
  EXPECT_TRUE(state_from_planar(p).isApprox(s, 0.0));
  EXPECT_THROW(planar_from_state(State::Zero(4)), std::invalid_argument);
}

TEST(MinJerkControl, EmitsTheQuinticJerk) {
  MinJerkTask task;
  task.target << 1.0, 1.0;
  task.horizon = 1.0;
  const PlanarState rest{};
  const auto u0 = minjerk_control(rest, task, 0.0);
  EXPECT_NEAR(u0[0], 60.0, 1e-12);
  EXPECT_NEAR(u0[1], 60.0, 1e-12);

  // Along the optimal plan the re-planned command reproduces the
  // original jerk profile.
  const auto q = solve_quintic(AxisState{}, 1.0, 1.0);
  for (double s = 0.1; s < 1.0; s += 0.2) {
    PlanarState mid;
    mid.x = {q.position(s), q.velocity(s), q.acceleration(s)};
    mid.y = mid.x;
    const auto u = minjerk_control(mid, task, s);
    EXPECT_NEAR(u[0], q.jerk(s), 1e-6) << "s " << s;
  }
  EXPECT_THROW(minjerk_control(rest, task, 1.0), std::invalid_argument);
  EXPECT_THROW(minjerk_control(rest, task, 1.5), std::invalid_argument);
}

class FixedTimeOracleTest : public ::testing::Test {
 protected:
  Task task_;

  FixedTimeOracleTest() {
    task_.kind = Task::Kind::SetpointFixedTime;
    task_.target = Eigen::VectorXd(2);
    task_.target << 1.0, -1.0;
    task_.horizon = 1.0;
  }

  // Centre each held sample on its interval: left-edge sampling of the
  // jerk biases a triple integrator at first order in the step.
  static Trajectory follow(const QuinticCoeffs& qx, const QuinticCoeffs& qy,
                           double T) {
    const double h = 1e-3;
    const ControlSignal u = [&qx, &qy, h](double t) {
      Control j(2);
      j << qx.jerk(t + h / 2.0), qy.jerk(t + h / 2.0);
      return j;
    };
    return integrate_plant(min_jerk_plant(), State::Zero(6), u, 0.0, T, h);
  }
};

TEST_F(FixedTimeOracleTest, AcceptsTheOptimalPlan) {
  const auto qx = solve_quintic(AxisState{}, 1.0, 1.0);
  const auto qy = solve_quintic(AxisState{}, -1.0, 1.0);
  const auto traj = follow(qx, qy, 1.0);
  const auto v = fixed_time_oracle({})(0, task_, 0.0, 1.0, traj);
  EXPECT_TRUE(v.pass) << v.reason;
  EXPECT_NEAR(v.cost.value, 720.0, 720.0 * 1e-3);
}

TEST_F(FixedTimeOracleTest, RejectsAMissedEndpoint) {
  const auto traj = integrate_plant(min_jerk_plant(), State::Zero(6),
                                    constant_control(Control::Zero(2)), 0.0,
                                    1.0, 1e-3);
  const auto v = fixed_time_oracle({})(0, task_, 0.0, 1.0, traj);
  EXPECT_FALSE(v.pass);
  EXPECT_NE(v.reason.find("endpoint miss"), std::string::npos);
}

TEST_F(FixedTimeOracleTest, RejectsAWastefulDetour) {
  // Overshoot to twice the target in the first half, then come back:
  // boundary conditions hold but the squared-jerk bill explodes.
  const auto qx1 = solve_quintic(AxisState{}, 2.0, 0.5);
  const auto qx2 = solve_quintic(AxisState{2.0, 0.0, 0.0}, 1.0, 0.5);
  const auto qy1 = solve_quintic(AxisState{}, -2.0, 0.5);
  const auto qy2 = solve_quintic(AxisState{-2.0, 0.0, 0.0}, -1.0, 0.5);
  const double h = 1e-3;
  const ControlSignal u = [&, h](double t) {
    const double s = t + h / 2.0;
    Control j(2);
    if (s < 0.5) {
      j << qx1.jerk(s), qy1.jerk(s);
    } else {
      j << qx2.jerk(s - 0.5), qy2.jerk(s - 0.5);
    }
    return j;
  };
  const auto traj =
      integrate_plant(min_jerk_plant(), State::Zero(6), u, 0.0, 1.0, h);
  const auto v = fixed_time_oracle({})(0, task_, 0.0, 1.0, traj);
  EXPECT_FALSE(v.pass);
  EXPECT_NE(v.reason.find("jerk cost"), std::string::npos);
}

TEST_F(FixedTimeOracleTest, RejectsTheWrongTaskShape) {
  const auto traj = integrate_plant(min_jerk_plant(), State::Zero(6),
                                    constant_control(Control::Zero(2)), 0.0,
                                    1.0, 1e-3);
  Task wrong = task_;
  wrong.kind = Task::Kind::Setpoint;
  const auto v = fixed_time_oracle({})(0, wrong, 0.0, 1.0, traj);
  EXPECT_FALSE(v.pass);
  EXPECT_NE(v.reason.find("fixed-time"), std::string::npos);
}

TEST_F(FixedTimeOracleTest, RejectsAHorizonBeyondTheWindow) {
  const auto traj = integrate_plant(min_jerk_plant(), State::Zero(6),
                                    constant_control(Control::Zero(2)), 0.0,
                                    1.0, 1e-3);
  Task late = task_;
  late.horizon = 2.0;
  const auto v = fixed_time_oracle({})(0, late, 0.0, 1.0, traj);
  EXPECT_FALSE(v.pass);
  EXPECT_NE(v.reason.find("beyond"), std::string::npos);
}

}  // namespace
