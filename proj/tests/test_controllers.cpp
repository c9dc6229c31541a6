#include "delaylab/controllers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "delaylab/harness.hpp"

namespace {

using namespace delaylab;

TEST(BangBang, SignOfTheError) {
  EXPECT_DOUBLE_EQ(bang_bang_1d(0.5, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(bang_bang_1d(-0.5, 0.0), -1.0);
  EXPECT_DOUBLE_EQ(bang_bang_1d(0.25, 0.25), 0.0);
}

TEST(MemorylessBinary, OnlyTheEndpointsAreAdmissible) {
  EXPECT_DOUBLE_EQ(memoryless_binary(1.0), 1.0);
  EXPECT_DOUBLE_EQ(memoryless_binary(-1.0), -1.0);
  EXPECT_THROW(memoryless_binary(0.5), std::invalid_argument);
  EXPECT_THROW(memoryless_binary(0.0), std::invalid_argument);
}

TEST(ReachHoldLaw, BangsFarOutAndParksTheNextSample) {
  const double h = 1e-3;
  const auto law = reach_hold_law(h);
  Task task;
  task.target = Eigen::VectorXd::Constant(1, 0.5);
  EXPECT_DOUBLE_EQ(law(task, State::Zero(1), 0.0)[0], 1.0);
  EXPECT_DOUBLE_EQ(law(task, State::Constant(1, 0.9), 0.0)[0], -1.0);
  EXPECT_DOUBLE_EQ(law(task, State::Constant(1, 0.5), 0.0)[0], 0.5);

  // From anywhere inside the one-step window, one held input lands the
  // next sample on the target.
  const auto dyn = scalar_linear_plant();
  for (double x0 : {0.4995, 0.4999, 0.5004, 0.5012}) {
    const State x = State::Constant(1, x0);
    const Control u = law(task, x, 0.0);
    EXPECT_LE(std::abs(u[0]), 1.0);
    EXPECT_NEAR(rk4_step(dyn, x, u, h)[0], 0.5, 1e-12) << x0;
  }

  Task planar;
  planar.target = Eigen::VectorXd::Zero(2);
  EXPECT_THROW(law(planar, State::Zero(1), 0.0), std::invalid_argument);
  EXPECT_THROW(reach_hold_law(0.0), std::invalid_argument);
}

TEST(ForwardModelPredict, ZeroDelayIsTheIdentity) {
  ControlMemory mem(0.0, 1e-3);
  mem.record(0.0, Control::Constant(1, 0.3));
  const State obs = State::Constant(1, 0.77);
  const auto report =
      forward_model_predict(scalar_linear_plant(), obs, mem, 1.0, 0.0);
  EXPECT_EQ(report.predicted_state[0], obs[0]);
  EXPECT_DOUBLE_EQ(report.window, 0.0);
}

TEST(ForwardModelPredict, RejectsBadInput) {
  ControlMemory mem(0.2, 1e-3);
  EXPECT_THROW(forward_model_predict(scalar_linear_plant(), State::Zero(1), mem,
                                     1.0, -0.1),
               std::invalid_argument);
  EXPECT_THROW(forward_model_predict(scalar_linear_plant(), State::Zero(2), mem,
                                     1.0, 0.2),
               std::invalid_argument);
}

// Drive a plant one RK4 step at a time while logging controls the way
// the closed loop does, then check that replaying the log from the
// delayed state lands exactly on the current state.
void expect_exact_reconstruction(const PlantDynamics& dyn, const State& x0,
                                 double delay, double h, int total_steps,
                                 std::mt19937& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const auto lag = std::llround(delay / h);

  ControlMemory mem(delay, h);
  std::vector<State> states = {x0};
  State x = x0;
  for (int k = 0; k < total_steps; ++k) {
    const double t = k * h;
    mem.advance_to(t);
    Control u(dyn.control_dim);
    for (int j = 0; j < dyn.control_dim; ++j) u[j] = unit(rng);
    mem.record(t, u);
    x = rk4_step(dyn, x, u, h);
    states.push_back(x);

    const double tn = (k + 1) * h;
    mem.advance_to(tn);
    const auto delayed_index =
        static_cast<std::size_t>(std::max(k + 1 - lag, 0LL));
    const auto report =
        forward_model_predict(dyn, states[delayed_index], mem, tn, delay);
    ASSERT_LT((report.predicted_state - x).lpNorm<Eigen::Infinity>(), 1e-9)
        << "t = " << tn << " delay = " << delay;
  }
}

TEST(ForwardModelPredict, ReconstructsTheScalarPlantExactly) {
  std::mt19937 rng(11);
  expect_exact_reconstruction(scalar_linear_plant(), State::Zero(1), 0.2, 1e-3,
                              600, rng);
}

TEST(ForwardModelPredict, ReconstructsRandomLinearPlantsExactly) {
  std::mt19937 rng(12);
  std::uniform_int_distribution<int> lag_steps(0, 400);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 2;
    LinearSystem sys;
    sys.M.resize(n, n);
    sys.N.resize(n, 1);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) sys.M(i, j) = unit(rng);
      sys.N(i, 0) = unit(rng);
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(sys.M);
    sys.M -= (es.eigenvalues().real().maxCoeff() + 0.5) *
             Eigen::MatrixXd::Identity(n, n);
    State x0(n);
    for (int i = 0; i < n; ++i) x0[i] = unit(rng);
    const double h = 1e-3;
    const double delay = lag_steps(rng) * h;
    expect_exact_reconstruction(linear_plant(sys), x0, delay, h, 500, rng);
  }
}

TEST(ForwardModelPredict, ReconstructsThePlanarPlantExactly) {
  std::mt19937 rng(13);
  expect_exact_reconstruction(min_jerk_plant(), State::Zero(6), 0.35, 1e-3,
                              500, rng);
}

TEST(ForwardModelController, TracksItsPrediction) {
  auto fm = make_forward_model_controller(scalar_linear_plant(),
                                          reach_hold_law(), 0.2, 1e-3);
  EXPECT_FALSE(fm->last_prediction().has_value());
  Task task;
  task.target = Eigen::VectorXd::Constant(1, 0.5);
  fm->memory().advance_to(0.0);
  fm->decide(task, true, fm->memory(), State::Zero(1));
  ASSERT_TRUE(fm->last_prediction().has_value());

  auto naive = make_naive_delayed_controller(reach_hold_law(), 0.2, 1e-3);
  naive->memory().advance_to(0.0);
  naive->decide(task, true, naive->memory(), State::Zero(1));
  EXPECT_FALSE(naive->last_prediction().has_value());
}

TEST(ForwardModelController, MatchesTheUndelayedLoopOnTheScalarPlant) {
  Task task;
  task.target = Eigen::VectorXd::Constant(1, 0.5);
  const auto schedule = TaskSchedule::single(task);
  const double h = 1e-3;

  auto fm = make_forward_model_controller(scalar_linear_plant(),
                                          reach_hold_law(), 0.2, h);
  std::vector<double> pt;
  std::vector<double> pe;
  const auto delayed = run_closed_loop(scalar_linear_plant(), *fm, schedule,
                                       0.2, h, 2.0, State::Zero(1), &pt, &pe);

  auto ref = make_forward_model_controller(scalar_linear_plant(),
                                           reach_hold_law(), 0.0, h);
  const auto undelayed = run_closed_loop(scalar_linear_plant(), *ref, schedule,
                                         0.0, h, 2.0, State::Zero(1));

  ASSERT_EQ(delayed.states.size(), undelayed.states.size());
  double sup = 0.0;
  for (std::size_t k = 0; k < delayed.states.size(); ++k) {
    sup = std::max(sup,
                   (delayed.states[k] - undelayed.states[k]).lpNorm<Eigen::Infinity>());
  }
  EXPECT_LT(sup, 1e-4);

  double worst_pred = 0.0;
  for (double e : pe) worst_pred = std::max(worst_pred, e);
  EXPECT_LT(worst_pred, 1e-9);
  EXPECT_EQ(pt.size(), delayed.controls.size());
}

// Records everything the decision interface hands over, so the loop's
// information discipline can be checked from outside.
class SpyController final : public Controller {
 public:
  SpyController(double window, double step) : Controller(window, step) {}

  Control decide(const Task&, bool switched, const ControlMemory& memory,
                 const State& delayed_state) override {
    switch_steps.push_back(switched);
    seen_times.push_back(memory.time());
    seen_states.push_back(delayed_state);
    memory_sizes.push_back(memory.size());
    return Control::Constant(1, 1.0);
  }

  std::vector<bool> switch_steps;
  std::vector<double> seen_times;
  std::vector<State> seen_states;
  std::vector<std::size_t> memory_sizes;
};

TEST(ClosedLoop, ControllerOnlySeesTheDelayedState) {
  const double h = 1e-3;
  const double delay = 0.2;
  const auto lag = std::llround(delay / h);
  Task task;
  task.target = Eigen::VectorXd::Constant(1, 1.0);
  SpyController spy(delay, h);
  const auto traj =
      run_closed_loop(scalar_linear_plant(), spy, TaskSchedule::single(task),
                      delay, h, 1.0, State::Zero(1));

  ASSERT_EQ(spy.seen_states.size(), traj.controls.size());
  double worst_vs_delayed = 0.0;
  double best_vs_current = 1e9;
  for (std::size_t k = 0; k < spy.seen_states.size(); ++k) {
    const auto delayed_index = k > static_cast<std::size_t>(lag)
                                   ? k - static_cast<std::size_t>(lag)
                                   : 0u;
    worst_vs_delayed =
        std::max(worst_vs_delayed,
                 std::abs(spy.seen_states[k][0] - traj.states[delayed_index][0]));
    if (k > static_cast<std::size_t>(lag)) {
      best_vs_current =
          std::min(best_vs_current,
                   std::abs(spy.seen_states[k][0] - traj.states[k][0]));
    }
    EXPECT_DOUBLE_EQ(spy.seen_times[k], static_cast<double>(k) * h);
  }
  // Exactly the lagged samples, never the fresh ones: on a strictly
  // rising trajectory the observation always trails the true state.
  EXPECT_EQ(worst_vs_delayed, 0.0);
  EXPECT_GT(best_vs_current, 1e-3);
}

TEST(ClosedLoop, MemoryStaysWithinTheDelayWindow) {
  const double h = 1e-3;
  const double delay = 0.05;
  const auto lag = static_cast<std::size_t>(std::llround(delay / h));
  Task task;
  task.target = Eigen::VectorXd::Constant(1, 1.0);
  SpyController spy(delay, h);
  run_closed_loop(scalar_linear_plant(), spy, TaskSchedule::single(task), delay,
                  h, 0.5, State::Zero(1));
  for (std::size_t k = 0; k < spy.memory_sizes.size(); ++k) {
    EXPECT_LE(spy.memory_sizes[k], lag + 1) << "step " << k;
    if (k <= lag) EXPECT_EQ(spy.memory_sizes[k], k);
  }
}

TEST(ClosedLoop, SwitchFlagFiresOncePerSegment) {
  const double h = 1e-3;
  Task first;
  first.target = Eigen::VectorXd::Constant(1, 0.5);
  Task second;
  second.target = Eigen::VectorXd::Constant(1, -0.5);
  const TaskSchedule schedule({0.0, 0.5}, {first, second});
  SpyController spy(0.1, h);
  run_closed_loop(scalar_linear_plant(), spy, schedule, 0.1, h, 1.0,
                  State::Zero(1));
  std::vector<std::size_t> fired;
  for (std::size_t k = 0; k < spy.switch_steps.size(); ++k) {
    if (spy.switch_steps[k]) fired.push_back(k);
  }
  ASSERT_EQ(fired.size(), 2u);
  EXPECT_EQ(fired[0], 0u);
  EXPECT_EQ(fired[1], 500u);
}

}  // namespace
