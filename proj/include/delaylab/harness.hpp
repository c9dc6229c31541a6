#pragma once

#include <optional>
#include <string>
#include <vector>

#include "delaylab/controllers.hpp"
#include "delaylab/dynamics.hpp"
#include "delaylab/minjerk.hpp"
#include "delaylab/tasks.hpp"

namespace delaylab {

enum class PlantKind { ScalarLinear, Linear, MinJerk };
enum class ControllerKind {
  ForwardModel,
  NaiveDelayed,
  UndelayedReference,
  MemorylessBinary,
  OpenLoop,
};

/// Everything a run needs, loadable from JSON. Switch times are snapped
/// to the integration grid during validation so task changes land
/// exactly on a step.
struct Scenario {
  PlantKind plant = PlantKind::ScalarLinear;
  std::optional<LinearSystem> system;  ///< required for PlantKind::Linear
  State initial_state;
  double delay = 0.0;
  ControllerKind controller = ControllerKind::ForwardModel;
  std::optional<Control> open_loop_control;  ///< required for OpenLoop
  TaskSchedule schedule;
  double step = 1e-3;
  double duration = 0.0;
  std::string output_dir;  ///< empty: keep results in memory only

  static Scenario from_json(const std::string& text);
  static Scenario from_file(const std::string& path);
  std::string to_json() const;
};

/// All problems with a scenario, empty when it is runnable.
std::vector<std::string> validate(const Scenario& sc);

struct SimResult {
  Trajectory trajectory;
  CtpsReport audit;
  std::vector<double> prediction_times;
  std::vector<double> prediction_error;  ///< |x_hat - x| inf-norm per decision
  bool controls_clamped = false;

  std::string summary_json() const;
  /// trajectory.csv, prediction_error.csv (when present), summary.json
  void write_outputs(const std::string& dir) const;
};

/// Validates, builds plant + controller, runs the closed loop, audits
/// every schedule segment with the task-appropriate oracle, and writes
/// outputs when an output directory is set. Throws ValidationError /
/// DivergenceError accordingly.
SimResult run_simulation(const Scenario& sc);

/// Closed loop around a caller-supplied controller; the building block
/// of run_simulation, exposed so tests can instrument the interface.
/// Per step: advance the controller's memory clock, observe through the
/// delay channel, decide on (task, switch flag, memory, observation)
/// only, clamp if the plant is bounded, record the applied control into
/// the controller's memory, then integrate one step.
Trajectory run_closed_loop(const PlantDynamics& dyn, Controller& ctrl,
                           const TaskSchedule& schedule, double delay,
                           double step, double duration, const State& x0,
                           std::vector<double>* prediction_times = nullptr,
                           std::vector<double>* prediction_error = nullptr,
                           bool* clamped = nullptr);

/// Two starts that a delay-width memory cannot tell apart, and the
/// common task that forces opposite first moves on the scalar plant.
struct CounterexampleReport {
  double s1 = 0.0;
  double s2 = 0.0;
  double x_star = 0.0;   ///< (s1 + s2) / 2
  double u1 = 0.0;       ///< sgn(x_star - s1)
  double u2 = 0.0;       ///< sgn(x_star - s2)
  bool controls_differ = false;

  std::string to_json() const;
};

/// Requires distinct s1, s2 in [-1, 1].
CounterexampleReport necessity_counterexample(double s1, double s2);

/// Outcome of probing whether two initial states require different
/// controls for some admissible task.
struct NsctpVerdict {
  bool nsctp = false;  ///< no single task set separates the pair
  std::string problem;
  std::string detail;
  std::optional<double> witness_task;  ///< separating scalar target, when found
  std::optional<double> witness_T;     ///< separating horizon, when found
  double jerk_gap = 0.0;

  std::string to_json() const;
};

/// Scalar plant, minimum-time setpoints: the midpoint target always
/// separates distinct starts, so the pair is never NSCTP.
NsctpVerdict nsctp_scan_eq5(double a, double b);

/// Planar minimum-jerk problem. With a fixed horizon T the pair is
/// NSCTP exactly on the coincidence surface 60 dx + 36 T dv + 9 T^2 da
/// = 0; with the horizon free, a separating T always exists.
NsctpVerdict nsctp_scan_minjerk(const AxisState& a, const AxisState& b,
                                std::optional<double> fixed_T);

}  // namespace delaylab
