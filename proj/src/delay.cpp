#include "delaylab/delay.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace delaylab {

namespace {

long long snap_steps(double span, double step) {
  return std::llround(span / step);
}

}  // namespace

ObservationChannel::ObservationChannel(double delay, double step)
    : delay_(delay), step_(step) {
  if (delay < 0.0) {
    throw std::invalid_argument("ObservationChannel: negative delay");
  }
  if (!(step > 0.0)) {
    throw std::invalid_argument("ObservationChannel: step must be positive");
  }
}

void ObservationChannel::record(double t, const State& x) {
  if (history_.empty()) {
    start_ = t;
    history_.push_back(x);
    return;
  }
  const auto expected = static_cast<long long>(history_.size());
  if (snap_steps(t - start_, step_) != expected) {
    throw std::invalid_argument(
        "ObservationChannel: samples must arrive in order, one step apart");
  }
  history_.push_back(x);
}

State ObservationChannel::observe(double t) const {
  if (history_.empty()) {
    throw std::invalid_argument("ObservationChannel: no history recorded");
  }
  const long long now = snap_steps(t - start_, step_);
  long long idx = now - snap_steps(delay_, step_);
  if (idx < 0) idx = 0;  // before the horizon: clamp to the initial state
  const auto last = static_cast<long long>(history_.size()) - 1;
  if (idx > last) idx = last;
  return history_[static_cast<std::size_t>(idx)];
}

ControlSegment::ControlSegment(double step, std::vector<Control> samples)
    : step_(step), samples_(std::move(samples)) {
  if (!samples_.empty() && !(step > 0.0)) {
    throw std::invalid_argument("ControlSegment: step must be positive");
  }
}

const Control& ControlSegment::at(double s) const {
  if (samples_.empty()) {
    throw std::invalid_argument("ControlSegment: empty signal");
  }
  // The small bias absorbs rounding in s/step for s on the grid, which
  // otherwise lands one sample early.
  auto idx = static_cast<long long>(std::floor(s / step_ + 1e-9));
  if (idx < 0) idx = 0;
  const auto last = static_cast<long long>(samples_.size()) - 1;
  if (idx > last) idx = last;
  return samples_[static_cast<std::size_t>(idx)];
}

ControlSignal ControlSegment::as_signal() const {
  return [seg = *this](double s) { return seg.at(s); };
}

ControlMemory::ControlMemory(double window, double step)
    : window_(window), step_(step) {
  if (window < 0.0) {
    throw std::invalid_argument("ControlMemory: negative window");
  }
  if (!(step > 0.0)) {
    throw std::invalid_argument("ControlMemory: step must be positive");
  }
}

void ControlMemory::advance_to(double t) {
  if (started_ && t < now_ - step_ * 1e-9) {
    throw std::invalid_argument("ControlMemory: time regression");
  }
  now_ = std::max(now_, t);
  started_ = true;
  evict();
}

void ControlMemory::record(double t, const Control& u) {
  if (!buffer_.empty() && t <= buffer_.back().first) {
    throw std::invalid_argument("ControlMemory: time regression");
  }
  advance_to(t);
  buffer_.emplace_back(t, u);
  evict();
}

void ControlMemory::evict() {
  const double oldest_kept = now_ - window_ - step_ / 2.0;
  while (!buffer_.empty() && buffer_.front().first < oldest_kept) {
    buffer_.pop_front();
  }
}

Control ControlMemory::query(double alpha) const {
  if (buffer_.empty()) {
    throw std::invalid_argument("ControlMemory: no controls recorded");
  }
  if (alpha < -step_ / 2.0 || alpha > window_ + step_ / 2.0) {
    throw std::invalid_argument("ControlMemory: lag outside [0, window]");
  }
  const double target = now_ - static_cast<double>(snap_steps(alpha, step_)) * step_;
  if (target < buffer_.front().first - step_ / 2.0) {
    throw std::invalid_argument("ControlMemory: lag exceeds buffered history");
  }
  // Nearest recorded time; the buffer is sorted by construction.
  auto it = std::lower_bound(
      buffer_.begin(), buffer_.end(), target,
      [](const std::pair<double, Control>& e, double v) { return e.first < v; });
  if (it == buffer_.end()) return buffer_.back().second;
  if (it == buffer_.begin()) return it->second;
  auto prev = std::prev(it);
  return (target - prev->first <= it->first - target) ? prev->second : it->second;
}

ControlSegment ControlMemory::segment(double from_alpha, double to_alpha) const {
  if (from_alpha < -step_ / 2.0 || to_alpha < from_alpha) {
    throw std::invalid_argument("ControlMemory: bad segment window");
  }
  if (to_alpha > window_ + step_ / 2.0) {
    throw std::invalid_argument("ControlMemory: window exceeds [0, window]");
  }
  const auto count = snap_steps(to_alpha - from_alpha, step_);
  std::vector<Control> samples;
  samples.reserve(static_cast<std::size_t>(count));
  // Forward time: sample k covers [t - to_alpha + k h, ... + h).
  for (long long k = 0; k < count; ++k) {
    samples.push_back(query(to_alpha - static_cast<double>(k) * step_));
  }
  return ControlSegment(step_, std::move(samples));
}

}  // namespace delaylab
