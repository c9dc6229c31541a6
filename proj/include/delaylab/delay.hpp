#pragma once

#include <deque>
#include <utility>
#include <vector>

#include "delaylab/dynamics.hpp"

namespace delaylab {

/// Fixed-lag view of the plant state: observe(t) returns the sample
/// recorded nearest to (t - delay)+, clamping to the first sample while
/// t < delay. History is recorded on a uniform grid.
class ObservationChannel {
 public:
  ObservationChannel(double delay, double step);

  /// Appends the sample for the next grid point. Times must arrive in
  /// order, one step apart.
  void record(double t, const State& x);

  State observe(double t) const;

  double delay() const { return delay_; }
  double step() const { return step_; }
  std::size_t size() const { return history_.size(); }

 private:
  double delay_;
  double step_;
  double start_ = 0.0;
  std::vector<State> history_;
};

/// Piecewise-constant control signal in forward local time: samples()[k]
/// is held on [k*step, (k+1)*step), so duration() = samples * step.
class ControlSegment {
 public:
  ControlSegment() = default;
  ControlSegment(double step, std::vector<Control> samples);

  double step() const { return step_; }
  double duration() const { return step_ * static_cast<double>(samples_.size()); }
  bool empty() const { return samples_.empty(); }
  const std::vector<Control>& samples() const { return samples_; }

  const Control& at(double s) const;
  ControlSignal as_signal() const;

 private:
  double step_ = 0.0;
  std::vector<Control> samples_;
};

/// Rolling record of the controller's own outputs over the last
/// `window` seconds: query(alpha) = u_{t-alpha} for 0 <= alpha <=
/// min(t, window), with alpha snapped to the recording grid. Wall time
/// is an explicit field; advance_to() lets time pass without a new
/// sample so the newest entry ages naturally.
class ControlMemory {
 public:
  ControlMemory(double window, double step);

  void advance_to(double t);
  void record(double t, const Control& u);

  Control query(double alpha) const;

  /// Re-indexes the buffer as a forward-time signal over
  /// [t - to_alpha, t - from_alpha): sample k of the result is
  /// u_{t - to_alpha + k*step}. An empty window yields an empty signal.
  ControlSegment segment(double from_alpha, double to_alpha) const;

  double time() const { return now_; }
  double window() const { return window_; }
  double step() const { return step_; }
  std::size_t size() const { return buffer_.size(); }
  bool empty() const { return buffer_.empty(); }

 private:
  void evict();

  double window_;
  double step_;
  double now_ = 0.0;
  bool started_ = false;
  std::deque<std::pair<double, Control>> buffer_;  // oldest first
};

}  // namespace delaylab
