#include "delaylab/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace delaylab {

TaskSchedule::TaskSchedule(std::vector<double> switch_times,
                           std::vector<Task> tasks)
    : switch_times_(std::move(switch_times)), tasks_(std::move(tasks)) {
  if (switch_times_.size() != tasks_.size()) {
    throw std::invalid_argument("TaskSchedule: times and tasks must align");
  }
  if (!switch_times_.empty() && switch_times_.front() != 0.0) {
    throw std::invalid_argument("TaskSchedule: first switch must be at t = 0");
  }
  for (std::size_t i = 1; i < switch_times_.size(); ++i) {
    if (switch_times_[i] <= switch_times_[i - 1]) {
      throw std::invalid_argument(
          "TaskSchedule: switch times must strictly increase");
    }
  }
  for (const auto& task : tasks_) {
    if (task.kind == Task::Kind::SetpointFixedTime && !(task.horizon > 0.0)) {
      throw std::invalid_argument(
          "TaskSchedule: fixed-time task needs a positive horizon");
    }
  }
}

TaskSchedule TaskSchedule::single(Task task) {
  return TaskSchedule({0.0}, {std::move(task)});
}

std::size_t TaskSchedule::segment_at(double t) const {
  if (tasks_.empty()) {
    throw std::invalid_argument("TaskSchedule: empty schedule");
  }
  auto it = std::upper_bound(switch_times_.begin(), switch_times_.end(), t);
  if (it == switch_times_.begin()) return 0;
  return static_cast<std::size_t>(std::distance(switch_times_.begin(), it)) - 1;
}

const Task& TaskSchedule::task_at(double t) const { return tasks_[segment_at(t)]; }

namespace {

double inf_dist(const State& x, const Eigen::VectorXd& target) {
  return (x - target).lpNorm<Eigen::Infinity>();
}

// Entry of the piecewise-linear interpolant into the band around the
// target, or npos. Judging samples alone would miss a crossing that
// enters and leaves the band within one step. `crossing` gets the
// interpolated entry time; the returned index is the first sample not
// before it.
constexpr std::size_t npos = static_cast<std::size_t>(-1);

std::size_t first_reach(const Trajectory& traj, const Eigen::VectorXd& target,
                        double tol, std::size_t from, std::size_t to,
                        double* crossing) {
  if (inf_dist(traj.states[from], target) <= tol) {
    if (crossing) *crossing = traj.times[from];
    return from;
  }
  for (std::size_t k = from + 1; k <= to; ++k) {
    // On the segment each coordinate sits inside its band on one
    // sub-interval of s in [0, 1]; the state is inside where all of
    // them overlap.
    double lo = 0.0;
    double hi = 1.0;
    for (Eigen::Index i = 0; i < target.size() && lo <= hi; ++i) {
      const double a = traj.states[k - 1][i] - target[i];
      const double b = traj.states[k][i] - target[i];
      if (a == b) {
        if (std::abs(a) > tol) {
          lo = 1.0;
          hi = 0.0;
        }
        continue;
      }
      const double s1 = (-tol - a) / (b - a);
      const double s2 = (tol - a) / (b - a);
      lo = std::max(lo, std::min(s1, s2));
      hi = std::min(hi, std::max(s1, s2));
    }
    if (lo <= hi) {
      if (crossing) {
        *crossing =
            traj.times[k - 1] + (traj.times[k] - traj.times[k - 1]) * lo;
      }
      return k;
    }
  }
  return npos;
}

}  // namespace

CostReport time_cost(const Trajectory& traj, const Eigen::VectorXd& x_star,
                     double tol) {
  if (traj.states.empty()) {
    throw std::invalid_argument("time_cost: empty trajectory");
  }
  if (traj.states.front().size() != x_star.size()) {
    throw std::invalid_argument("time_cost: target dimension mismatch");
  }
  if (!(tol > 0.0)) {
    throw std::invalid_argument("time_cost: tolerance must be positive");
  }
  CostReport report;
  double crossing = 0.0;
  const auto hit =
      first_reach(traj, x_star, tol, 0, traj.states.size() - 1, &crossing);
  if (hit == npos) {
    report.value = std::numeric_limits<double>::infinity();
    return report;
  }
  report.completion_time = crossing - traj.times.front();
  report.value = *report.completion_time;
  return report;
}

double jerk_cost(const std::function<Eigen::VectorXd(double)>& jerk, double T,
                 int intervals) {
  if (!(T > 0.0)) {
    throw std::invalid_argument("jerk_cost: horizon must be positive");
  }
  if (intervals < 2) intervals = 2;
  if (intervals % 2 != 0) ++intervals;
  const double h = T / intervals;
  auto f = [&jerk](double t) { return jerk(t).squaredNorm(); };
  double sum = f(0.0) + f(T);
  for (int k = 1; k < intervals; ++k) {
    sum += f(k * h) * (k % 2 == 1 ? 4.0 : 2.0);
  }
  return 0.5 * sum * h / 3.0;
}

double jerk_cost(const std::vector<Control>& held_samples, double step) {
  if (!(step > 0.0)) {
    throw std::invalid_argument("jerk_cost: step must be positive");
  }
  double sum = 0.0;
  for (const auto& u : held_samples) sum += u.squaredNorm();
  return 0.5 * sum * step;
}

CtpsReport ctps_audit(const TaskSchedule& schedule, const Trajectory& traj,
                      const SegmentOracle& oracle) {
  CtpsReport report;
  if (schedule.empty()) return report;  // nothing demanded, vacuous pass
  if (traj.states.empty()) {
    throw std::invalid_argument("ctps_audit: empty trajectory");
  }
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const double begin = schedule.switch_times()[i];
    const double end = i + 1 < schedule.size() ? schedule.switch_times()[i + 1]
                                               : traj.end_time();
    SegmentVerdict verdict;
    if (begin > traj.end_time()) {
      verdict.index = i;
      verdict.begin = begin;
      verdict.end = end;
      verdict.pass = false;
      verdict.reason = "segment starts beyond the trajectory";
    } else {
      verdict = oracle(i, schedule.tasks()[i], begin, end, traj);
    }
    report.all_pass = report.all_pass && verdict.pass;
    report.segments.push_back(std::move(verdict));
  }
  return report;
}

SegmentOracle setpoint_oracle(
    std::function<double(const State& begin_state, const Task&)> optimum,
    const SetpointAuditParams& params) {
  return [optimum, params](std::size_t index, const Task& task, double begin,
                           double end, const Trajectory& traj) {
    SegmentVerdict v;
    v.index = index;
    v.begin = begin;
    v.end = end;

    const std::size_t k0 = traj.index_at(begin);
    const std::size_t k1 = traj.index_at(end);
    const State& entry = traj.states[k0];
    const double tau_opt = optimum(entry, task);

    double crossing = 0.0;
    const auto hit =
        first_reach(traj, task.target, params.reach_tol, k0, k1, &crossing);
    if (hit == npos) {
      v.pass = false;
      v.reason = "target not reached";
      v.cost.value = std::numeric_limits<double>::infinity();
      return v;
    }
    const double tau_f = crossing - traj.times[k0];
    v.cost.completion_time = tau_f;
    v.cost.value = tau_f;

    if (std::abs(tau_f - tau_opt) > params.time_tol) {
      v.pass = false;
      std::ostringstream msg;
      msg << "reach time " << tau_f << " vs optimum " << tau_opt;
      v.reason = msg.str();
      return v;
    }

    // After first reach the trajectory must stay honest: bounded
    // excursion and, within the settle window, back in the band for
    // good.
    double overshoot = 0.0;
    std::size_t last_out = npos;
    for (std::size_t k = hit; k <= k1; ++k) {
      const double d = inf_dist(traj.states[k], task.target);
      overshoot = std::max(overshoot, d - params.reach_tol);
      if (d > params.reach_tol) last_out = k;
    }
    if (overshoot > params.overshoot_limit) {
      std::ostringstream msg;
      msg << "overshoot " << overshoot << " beyond the reach band";
      v.pass = false;
      v.reason = msg.str();
      return v;
    }
    const double settle_deadline =
        crossing + params.settle_window + traj.step() + 1e-12;
    if (last_out != npos && traj.times[last_out] > settle_deadline) {
      v.pass = false;
      v.reason = "failed to settle inside the reach band";
      return v;
    }

    v.pass = true;
    v.reason = "ok";
    return v;
  };
}

}  // namespace delaylab
