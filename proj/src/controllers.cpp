#include "delaylab/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace delaylab {

PredictionReport forward_model_predict(const PlantDynamics& dyn,
                                       const State& delayed_state,
                                       const ControlMemory& memory, double t,
                                       double delay) {
  if (delay < 0.0) {
    throw std::invalid_argument("forward_model_predict: negative delay");
  }
  if (delayed_state.size() != dyn.state_dim) {
    throw std::invalid_argument(
        "forward_model_predict: state dimension mismatch");
  }
  const double h = memory.step();
  // Replay window in whole steps, consistent with the nearest-grid
  // lookup of the observation channel.
  const long long lag = std::llround(delay / h);
  const long long now = std::llround(t / h);
  const long long steps = std::min(std::max(now, 0LL), std::max(lag, 0LL));

  PredictionReport report;
  report.step = h;
  report.window = static_cast<double>(steps) * h;
  if (steps == 0) {
    report.predicted_state = delayed_state;
    return report;
  }
  const ControlSegment seg = memory.segment(0.0, report.window);
  const Trajectory replay = integrate_plant(dyn, delayed_state, seg.as_signal(),
                                            0.0, report.window, h);
  report.predicted_state = replay.states.back();
  return report;
}

double bang_bang_1d(double x_star, double x) {
  const double e = x_star - x;
  if (e > 0.0) return 1.0;
  if (e < 0.0) return -1.0;
  return 0.0;
}

double memoryless_binary(double x_star) {
  if (x_star != 1.0 && x_star != -1.0) {
    throw std::invalid_argument(
        "memoryless_binary: target must be -1 or +1");
  }
  return x_star;
}

StateFeedbackLaw reach_hold_law(double step) {
  if (!(step > 0.0)) {
    throw std::invalid_argument("reach_hold_law: step must be positive");
  }
  const double decay = std::exp(-step);
  return [decay](const Task& task, const State& x, double) {
    if (task.target.size() != 1 || x.size() < 1) {
      throw std::invalid_argument("reach_hold_law: scalar task expected");
    }
    const double x_star = task.target[0];
    // Held over one step, u drives x to x e^-h + u (1 - e^-h); solve
    // for the value that lands on the target and saturate. Outside the
    // one-step window this is the bang toward the target.
    Control u(1);
    u[0] = std::clamp((x_star - x[0] * decay) / (1.0 - decay), -1.0, 1.0);
    return u;
  };
}

namespace {

class ForwardModelController final : public Controller {
 public:
  ForwardModelController(PlantDynamics dyn, StateFeedbackLaw inner, double delay,
                         double step)
      : Controller(delay, step),
        dyn_(std::move(dyn)),
        inner_(std::move(inner)),
        delay_(delay) {}

  Control decide(const Task& task, bool switched, const ControlMemory& memory,
                 const State& delayed_state) override {
    const double t = memory.time();
    if (switched) task_start_ = t;
    const PredictionReport report =
        forward_model_predict(dyn_, delayed_state, memory, t, delay_);
    prediction_ = report.predicted_state;
    return inner_(task, report.predicted_state, t - task_start_);
  }

  std::optional<State> last_prediction() const override { return prediction_; }

 private:
  PlantDynamics dyn_;
  StateFeedbackLaw inner_;
  double delay_;
  double task_start_ = 0.0;
  std::optional<State> prediction_;
};

class NaiveDelayedController final : public Controller {
 public:
  NaiveDelayedController(StateFeedbackLaw inner, double delay, double step)
      : Controller(delay, step), inner_(std::move(inner)) {}

  Control decide(const Task& task, bool switched, const ControlMemory& memory,
                 const State& delayed_state) override {
    const double t = memory.time();
    if (switched) task_start_ = t;
    return inner_(task, delayed_state, t - task_start_);
  }

 private:
  StateFeedbackLaw inner_;
  double task_start_ = 0.0;
};

}  // namespace

std::unique_ptr<Controller> make_forward_model_controller(PlantDynamics dyn,
                                                          StateFeedbackLaw inner,
                                                          double delay,
                                                          double step) {
  return std::make_unique<ForwardModelController>(std::move(dyn),
                                                  std::move(inner), delay, step);
}

std::unique_ptr<Controller> make_naive_delayed_controller(StateFeedbackLaw inner,
                                                          double delay,
                                                          double step) {
  return std::make_unique<NaiveDelayedController>(std::move(inner), delay, step);
}

}  // namespace delaylab
