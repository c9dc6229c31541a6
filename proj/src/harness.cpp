#include "delaylab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "delaylab/delay.hpp"
#include "delaylab/errors.hpp"

namespace delaylab {

namespace {

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

class OpenLoopController final : public Controller {
 public:
  OpenLoopController(Control u, double step)
      : Controller(0.0, step), u_(std::move(u)) {}

  Control decide(const Task&, bool, const ControlMemory&, const State&) override {
    return u_;
  }

 private:
  Control u_;
};

class MemorylessBinaryController final : public Controller {
 public:
  MemorylessBinaryController(double delay, double step)
      : Controller(delay, step) {}

  Control decide(const Task& task, bool, const ControlMemory&,
                 const State&) override {
    Control u(1);
    u[0] = memoryless_binary(task.target[0]);
    return u;
  }
};

// Receding-horizon planar law: re-plan the quintic from the state
// estimate at every step; once the horizon is spent, coast.
StateFeedbackLaw minjerk_law() {
  return [](const Task& task, const State& x, double elapsed) -> Control {
    Control u = Control::Zero(2);
    if (elapsed < task.horizon) {
      MinJerkTask mt;
      mt.target << task.target[0], task.target[1];
      mt.horizon = task.horizon;
      u = minjerk_control(planar_from_state(x), mt, elapsed);
    }
    return u;
  };
}

// First entry of xdot = -x + sgn(x* - x) into the tol band around x*,
// in closed form. Finite for every target in [-1, 1], including the
// endpoints that are only reached asymptotically.
double scalar_band_entry_time(double x0, double x_star, double tol) {
  if (std::abs(x_star - x0) <= tol) return 0.0;
  const double u = x_star > x0 ? 1.0 : -1.0;
  return std::log(std::abs(u - x0) / (std::abs(u - x_star) + tol));
}

TaskSchedule snap_schedule(const TaskSchedule& schedule, double step) {
  if (schedule.empty()) return schedule;
  std::vector<double> times;
  times.reserve(schedule.size());
  for (double t : schedule.switch_times()) {
    times.push_back(static_cast<double>(std::llround(t / step)) * step);
  }
  return TaskSchedule(std::move(times), schedule.tasks());
}

const char* plant_name(PlantKind kind) {
  switch (kind) {
    case PlantKind::ScalarLinear: return "scalar_linear";
    case PlantKind::Linear: return "linear";
    case PlantKind::MinJerk: return "min_jerk";
  }
  return "?";
}

}  // namespace

Trajectory run_closed_loop(const PlantDynamics& dyn, Controller& ctrl,
                           const TaskSchedule& schedule, double delay,
                           double step, double duration, const State& x0,
                           std::vector<double>* prediction_times,
                           std::vector<double>* prediction_error,
                           bool* clamped) {
  if (!(step > 0.0)) {
    throw std::invalid_argument("run_closed_loop: step must be positive");
  }
  if (duration < 0.0) {
    throw std::invalid_argument("run_closed_loop: negative duration");
  }
  const auto steps = std::llround(duration / step);

  ObservationChannel channel(delay, step);
  channel.record(0.0, x0);

  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.controls.reserve(steps);
  traj.times.push_back(0.0);
  traj.states.push_back(x0);

  static const Task no_task{};
  State x = x0;
  std::size_t next_switch = 0;
  for (long long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * step;

    bool switched = false;
    if (!schedule.empty() && next_switch < schedule.size() &&
        std::abs(schedule.switch_times()[next_switch] - t) <= step / 2.0) {
      switched = true;
      ++next_switch;
    }
    const Task& task = schedule.empty() ? no_task : schedule.task_at(t);

    ctrl.memory().advance_to(t);
    const State obs = channel.observe(t);
    Control u = ctrl.decide(task, switched, ctrl.memory(), obs);
    if (u.size() != dyn.control_dim) {
      throw std::invalid_argument("run_closed_loop: control dimension mismatch");
    }
    if (dyn.bounded_controls) {
      bool touched = false;
      u = clamp_box(u, &touched);
      if (touched && clamped) *clamped = true;
    }
    ctrl.memory().record(t, u);

    if (prediction_times && prediction_error) {
      if (const auto pred = ctrl.last_prediction()) {
        prediction_times->push_back(t);
        prediction_error->push_back((*pred - x).lpNorm<Eigen::Infinity>());
      }
    }

    const double tn = static_cast<double>(k + 1) * step;
    x = rk4_step(dyn, x, u, step);
    if (!x.allFinite()) {
      std::ostringstream msg;
      msg << "closed loop diverged at t = " << tn;
      throw DivergenceError(msg.str(), tn);
    }
    channel.record(tn, x);
    traj.times.push_back(tn);
    traj.states.push_back(x);
    traj.controls.push_back(std::move(u));
  }
  return traj;
}

std::vector<std::string> validate(const Scenario& sc) {
  std::vector<std::string> bad;
  if (!(sc.step > 0.0)) bad.push_back("step must be positive");
  if (sc.duration < 0.0) bad.push_back("duration must not be negative");
  if (sc.delay < 0.0) bad.push_back("delay must not be negative");
  if (sc.initial_state.size() == 0) bad.push_back("initial state is empty");
  if (sc.initial_state.size() > 0 && !sc.initial_state.allFinite()) {
    bad.push_back("initial state must be finite");
  }

  int want_dim = 0;
  switch (sc.plant) {
    case PlantKind::ScalarLinear: want_dim = 1; break;
    case PlantKind::MinJerk: want_dim = 6; break;
    case PlantKind::Linear:
      if (!sc.system) {
        bad.push_back("linear plant needs an (M, N) system");
      } else {
        try {
          sc.system->validate();
          want_dim = sc.system->n();
        } catch (const std::invalid_argument& e) {
          bad.push_back(e.what());
        }
      }
      break;
  }
  if (want_dim > 0 && sc.initial_state.size() > 0 &&
      sc.initial_state.size() != want_dim) {
    std::ostringstream msg;
    msg << plant_name(sc.plant) << " plant expects a state of dimension "
        << want_dim;
    bad.push_back(msg.str());
  }

  const bool open_loop = sc.controller == ControllerKind::OpenLoop;
  if (sc.plant == PlantKind::Linear && !open_loop) {
    bad.push_back("linear plants run open loop only");
  }
  if (open_loop && sc.plant != PlantKind::Linear) {
    bad.push_back("open-loop control is for linear plants only");
  }
  if (open_loop) {
    if (!sc.open_loop_control) {
      bad.push_back("open-loop scenario needs a control vector");
    } else if (sc.system &&
               sc.open_loop_control->size() != sc.system->m()) {
      bad.push_back("open-loop control dimension must match the system");
    }
    if (!sc.schedule.empty()) {
      bad.push_back("open-loop scenarios take no task schedule");
    }
    return bad;
  }

  if (sc.schedule.empty()) {
    bad.push_back("closed-loop scenario needs a non-empty schedule");
    return bad;
  }
  if (sc.schedule.switch_times().back() >= sc.duration) {
    bad.push_back("duration must extend past the last switch");
  }
  // Snapping must not merge neighbouring switches.
  if (sc.step > 0.0) {
    try {
      snap_schedule(sc.schedule, sc.step);
    } catch (const std::invalid_argument&) {
      bad.push_back("switch times collapse onto one grid point");
    }
  }

  for (std::size_t i = 0; i < sc.schedule.size(); ++i) {
    const Task& task = sc.schedule.tasks()[i];
    std::ostringstream where;
    where << "task " << i << ": ";
    if (sc.plant == PlantKind::ScalarLinear) {
      if (task.kind != Task::Kind::Setpoint) {
        bad.push_back(where.str() + "scalar plant takes minimum-time setpoints");
      }
      if (task.target.size() != 1) {
        bad.push_back(where.str() + "target must be scalar");
      } else if (std::abs(task.target[0]) > 1.0) {
        bad.push_back(where.str() + "target outside the reachable range [-1, 1]");
      } else if (sc.controller == ControllerKind::MemorylessBinary &&
                 task.target[0] != 1.0 && task.target[0] != -1.0) {
        bad.push_back(where.str() + "memoryless controller takes targets -1 or +1");
      }
    } else if (sc.plant == PlantKind::MinJerk) {
      if (task.kind != Task::Kind::SetpointFixedTime) {
        bad.push_back(where.str() + "planar plant takes fixed-time setpoints");
      } else {
        if (task.target.size() != 2) {
          bad.push_back(where.str() + "target must be planar");
        }
        const double begin = sc.schedule.switch_times()[i];
        const double end = i + 1 < sc.schedule.size()
                               ? sc.schedule.switch_times()[i + 1]
                               : sc.duration;
        if (task.horizon > end - begin + sc.step / 2.0) {
          bad.push_back(where.str() + "horizon exceeds its segment");
        }
      }
      if (sc.controller == ControllerKind::MemorylessBinary) {
        bad.push_back("memoryless controller is for the scalar plant");
      }
    }
  }
  return bad;
}

SimResult run_simulation(const Scenario& sc) {
  const auto bad = validate(sc);
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "scenario invalid:";
    for (const auto& b : bad) msg << "\n  - " << b;
    throw ValidationError(msg.str(), bad);
  }

  PlantDynamics dyn;
  switch (sc.plant) {
    case PlantKind::ScalarLinear: dyn = scalar_linear_plant(); break;
    case PlantKind::Linear: dyn = linear_plant(*sc.system); break;
    case PlantKind::MinJerk: dyn = min_jerk_plant(); break;
  }

  const bool undelayed = sc.controller == ControllerKind::UndelayedReference;
  const double delay = undelayed ? 0.0 : sc.delay;
  const StateFeedbackLaw law = sc.plant == PlantKind::MinJerk
                                   ? minjerk_law()
                                   : reach_hold_law(sc.step);

  std::unique_ptr<Controller> ctrl;
  switch (sc.controller) {
    case ControllerKind::ForwardModel:
    case ControllerKind::UndelayedReference:
      ctrl = make_forward_model_controller(dyn, law, delay, sc.step);
      break;
    case ControllerKind::NaiveDelayed:
      ctrl = make_naive_delayed_controller(law, delay, sc.step);
      break;
    case ControllerKind::MemorylessBinary:
      ctrl = std::make_unique<MemorylessBinaryController>(delay, sc.step);
      break;
    case ControllerKind::OpenLoop:
      ctrl = std::make_unique<OpenLoopController>(*sc.open_loop_control, sc.step);
      break;
  }

  const TaskSchedule schedule = snap_schedule(sc.schedule, sc.step);
  SimResult result;
  result.trajectory = run_closed_loop(
      dyn, *ctrl, schedule, delay, sc.step, sc.duration, sc.initial_state,
      &result.prediction_times, &result.prediction_error,
      &result.controls_clamped);

  SetpointAuditParams sp;
  sp.settle_window = 5.0 * delay;
  const SegmentOracle reach_oracle = setpoint_oracle(
      [tol = sp.reach_tol](const State& begin_state, const Task& task) {
        return scalar_band_entry_time(begin_state[0], task.target[0], tol);
      },
      sp);
  const SegmentOracle fixed_oracle = fixed_time_oracle({});
  const SegmentOracle dispatch = [&](std::size_t index, const Task& task,
                                     double begin, double end,
                                     const Trajectory& traj) {
    return task.kind == Task::Kind::Setpoint
               ? reach_oracle(index, task, begin, end, traj)
               : fixed_oracle(index, task, begin, end, traj);
  };
  result.audit = ctps_audit(schedule, result.trajectory, dispatch);

  if (!sc.output_dir.empty()) {
    result.write_outputs(sc.output_dir);
  }
  return result;
}

CounterexampleReport necessity_counterexample(double s1, double s2) {
  if (s1 == s2) {
    throw std::invalid_argument(
        "necessity_counterexample: states must be distinct");
  }
  if (std::abs(s1) > 1.0 || std::abs(s2) > 1.0) {
    throw std::invalid_argument(
        "necessity_counterexample: states must lie in [-1, 1]");
  }
  CounterexampleReport report;
  report.s1 = s1;
  report.s2 = s2;
  report.x_star = 0.5 * (s1 + s2);
  report.u1 = bang_bang_1d(report.x_star, s1);
  report.u2 = bang_bang_1d(report.x_star, s2);
  report.controls_differ = report.u1 != report.u2;
  return report;
}

NsctpVerdict nsctp_scan_eq5(double a, double b) {
  if (a == b) {
    throw std::invalid_argument("nsctp_scan_eq5: states must be distinct");
  }
  if (std::abs(a) > 1.0 || std::abs(b) > 1.0) {
    throw std::invalid_argument("nsctp_scan_eq5: states must lie in [-1, 1]");
  }
  NsctpVerdict v;
  v.problem = "eq5";
  v.nsctp = false;
  v.witness_task = 0.5 * (a + b);
  std::ostringstream msg;
  msg << "setpoint " << *v.witness_task
      << " forces opposite first controls from the two states";
  v.detail = msg.str();
  return v;
}

NsctpVerdict nsctp_scan_minjerk(const AxisState& a, const AxisState& b,
                                std::optional<double> fixed_T) {
  NsctpVerdict v;
  v.problem = "minjerk";
  if (fixed_T) {
    v.nsctp = nsctp_fixed_T(a, b, *fixed_T);
    v.witness_T = *fixed_T;
    if (v.nsctp) {
      v.detail =
          "initial jerks coincide for every target at this horizon; "
          "no task at this horizon separates the pair";
    } else {
      v.jerk_gap = initial_jerk(a, 0.0, *fixed_T) - initial_jerk(b, 0.0, *fixed_T);
      std::ostringstream msg;
      msg << "initial jerks differ by " << v.jerk_gap << " at every target";
      v.detail = msg.str();
    }
    return v;
  }
  const SeparatingTime st = separating_time(a, b);
  v.nsctp = false;
  v.witness_T = st.chosen_T;
  v.jerk_gap = st.jerk_gap;
  std::ostringstream msg;
  msg << "horizon " << st.chosen_T << " separates the pair ("
      << st.roots.size() << " coincidence root"
      << (st.roots.size() == 1 ? "" : "s") << ")";
  v.detail = msg.str();
  return v;
}

}  // namespace delaylab
