#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace delaylab {

/// Input or configuration rejected before any computation ran.
/// Carries the full list of violations so callers can report all of
/// them at once instead of fixing one field per attempt.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg,
                           std::vector<std::string> violations = {})
      : std::runtime_error(msg), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Integration produced a non-finite state.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& msg, double t)
      : std::runtime_error(msg), time_(t) {}

  double time() const { return time_; }

 private:
  double time_;
};

/// A search ran out of horizon before meeting its goal
/// (e.g. a target outside the reachable set).
class HorizonError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace delaylab
