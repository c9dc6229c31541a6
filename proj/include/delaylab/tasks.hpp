#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "delaylab/dynamics.hpp"

namespace delaylab {

/// What the controller is asked to do from a switch time onward.
///
/// Setpoint: reach the target in minimum time (cost = first reach time).
/// SetpointFixedTime: be at the target exactly `horizon` seconds after
/// the switch, minimising integrated squared jerk on the way.
struct Task {
  enum class Kind { Setpoint, SetpointFixedTime };

  Kind kind = Kind::Setpoint;
  Eigen::VectorXd target;
  double horizon = 0.0;  ///< only meaningful for SetpointFixedTime
};

/// Piecewise-constant task assignment: tasks()[i] is active on
/// [switch_times()[i], switch_times()[i+1]). A non-empty schedule must
/// start at time zero and switch times must strictly increase.
class TaskSchedule {
 public:
  TaskSchedule() = default;
  TaskSchedule(std::vector<double> switch_times, std::vector<Task> tasks);

  static TaskSchedule single(Task task);  ///< one task from t = 0

  const Task& task_at(double t) const;
  std::size_t segment_at(double t) const;

  bool empty() const { return tasks_.empty(); }
  std::size_t size() const { return tasks_.size(); }
  const std::vector<double>& switch_times() const { return switch_times_; }
  const std::vector<Task>& tasks() const { return tasks_; }

 private:
  std::vector<double> switch_times_;
  std::vector<Task> tasks_;
};

/// JSON array of {t, kind, target, T?} objects; kind is "setpoint" or
/// "setpoint_in_fixed_time" (T required for the latter).
TaskSchedule schedule_from_json(const std::string& text);
std::string schedule_to_json(const TaskSchedule& schedule);

struct CostReport {
  double value = 0.0;
  std::optional<double> completion_time;

  bool completed() const { return completion_time.has_value(); }
};

/// First time the trajectory is within `tol` of the target in infinity
/// norm, interpolated linearly between the straddling grid points.
/// value = that time when completed; +inf otherwise.
CostReport time_cost(const Trajectory& traj, const Eigen::VectorXd& x_star,
                     double tol = 1e-4);

/// 0.5 * int_0^T |jerk|^2 dt by composite Simpson.
double jerk_cost(const std::function<Eigen::VectorXd(double)>& jerk, double T,
                 int intervals = 2000);

/// Same cost for a recorded zero-order-hold jerk signal (exact for the
/// held signal: a plain sum of |u_k|^2 * step / 2).
double jerk_cost(const std::vector<Control>& held_samples, double step);

struct SegmentVerdict {
  std::size_t index = 0;
  double begin = 0.0;
  double end = 0.0;
  bool pass = false;
  std::string reason;
  CostReport cost;
};

struct CtpsReport {
  std::vector<SegmentVerdict> segments;
  bool all_pass = true;
};

/// Judges one schedule segment given the full trajectory.
using SegmentOracle = std::function<SegmentVerdict(
    std::size_t index, const Task& task, double begin, double end,
    const Trajectory& traj)>;

/// Slices the trajectory by the schedule and asks the oracle for a
/// verdict per segment. An empty schedule passes vacuously.
CtpsReport ctps_audit(const TaskSchedule& schedule, const Trajectory& traj,
                      const SegmentOracle& oracle);

/// Tolerances for judging a minimum-time setpoint segment.
struct SetpointAuditParams {
  double reach_tol = 1e-4;      ///< infinity-norm band around the target
  double time_tol = 2e-3;       ///< allowed gap to the reference optimum
  double overshoot_limit = 0.05;  ///< max excursion past the band after first reach
  double settle_window = 0.0;   ///< extra time after first reach to re-enter for good
};

/// Builds an oracle for minimum-time segments. `optimum` supplies the
/// reference reach time from the segment's entry state; the verdict
/// requires reaching near that optimum, overshoot below the limit, and
/// settling inside the band within settle_window of first reach.
SegmentOracle setpoint_oracle(
    std::function<double(const State& begin_state, const Task&)> optimum,
    const SetpointAuditParams& params);

}  // namespace delaylab
