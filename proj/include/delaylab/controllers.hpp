#pragma once

#include <memory>
#include <optional>

#include "delaylab/delay.hpp"
#include "delaylab/dynamics.hpp"
#include "delaylab/tasks.hpp"

namespace delaylab {

struct PredictionReport {
  State predicted_state;
  double window = 0.0;  ///< seconds of history replayed (grid-snapped min(t, delay))
  double step = 0.0;
};

/// Reconstructs the present state from a delayed observation by
/// replaying the recorded controls through the plant model over the
/// last min(t, delay) seconds. With delay = 0 the observation is
/// returned untouched.
PredictionReport forward_model_predict(const PlantDynamics& dyn,
                                       const State& delayed_state,
                                       const ControlMemory& memory, double t,
                                       double delay);

/// sgn(x_star - x) with sgn(0) = 0.
double bang_bang_1d(double x_star, double x);

/// The only admissible memoryless policy for targets in {-1, +1}:
/// u = x_star. Any other target is rejected.
double memoryless_binary(double x_star);

/// Decision interface. Everything a controller may consult is in the
/// four arguments: the active task, the switch flag for this step, a
/// snapshot of its own output memory (which also carries wall time),
/// and the delayed observation. The true current state is deliberately
/// absent.
class Controller {
 public:
  Controller(double window, double step) : memory_(window, step) {}
  virtual ~Controller() = default;

  virtual Control decide(const Task& task, bool switched,
                         const ControlMemory& memory,
                         const State& delayed_state) = 0;

  /// Most recent state estimate, when the controller forms one.
  virtual std::optional<State> last_prediction() const { return std::nullopt; }

  ControlMemory& memory() { return memory_; }
  const ControlMemory& memory() const { return memory_; }

 private:
  ControlMemory memory_;
};

/// Instantaneous feedback law used inside a controller. `elapsed` is
/// the time since the current task became active; fixed-horizon laws
/// need it, minimum-time laws ignore it.
using StateFeedbackLaw =
    std::function<Control(const Task& task, const State& x, double elapsed)>;

/// Scalar reach-then-hold law for the built-in plant, sampled at
/// `step`: the emitted input is the one whose zero-order hold parks the
/// next sample exactly on the target, saturated to [-1, 1]. Far from
/// the target the saturation makes it the familiar bang; at the target
/// it reduces to u = x_star, the plant's equilibrium input. Parking in
/// one step instead of holding a band avoids the sampled limit cycle a
/// thin band invites: a band narrower than one step's travel is crossed
/// between samples, so a band-hold controller captures only by luck.
StateFeedbackLaw reach_hold_law(double step = 1e-3);

/// Wraps a state-feedback law with the forward model: each decision
/// first reconstructs the present state from (delayed observation,
/// recorded controls), then applies the law to the reconstruction.
std::unique_ptr<Controller> make_forward_model_controller(
    PlantDynamics dyn, StateFeedbackLaw inner, double delay, double step);

/// Applies the law directly to the delayed observation. The comparison
/// baseline: identical law, no reconstruction.
std::unique_ptr<Controller> make_naive_delayed_controller(StateFeedbackLaw inner,
                                                          double delay,
                                                          double step);

}  // namespace delaylab
