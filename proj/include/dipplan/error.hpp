#pragma once

#include <stdexcept>
#include <string>

namespace dipplan {

/// Malformed or inconsistent input. `pointer` is a JSON pointer into the
/// offending document when one applies.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what, std::string pointer = {})
      : std::runtime_error(pointer.empty() ? what : what + " (at " + pointer + ")"),
        pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

/// A planning stage could not complete.
class PlanningError : public std::runtime_error {
 public:
  PlanningError(std::string stage, const std::string& what)
      : std::runtime_error("[" + stage + "] " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace dipplan
