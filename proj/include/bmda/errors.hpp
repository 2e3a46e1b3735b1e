#pragma once

#include <stdexcept>
#include <string>

namespace bmda {

// Domain argument out of range (probabilities outside [0,1], negative counts, ...).
class invalid_parameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Scenario / election configuration inconsistent with itself or with a request.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input record; carries the 1-based line number when known.
class data_error : public std::runtime_error {
 public:
  explicit data_error(const std::string& msg, long line = 0)
      : std::runtime_error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_ = 0;
};

// Event stream timestamp went backwards.
class out_of_order_event : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No (machine, slot) capacity left for another audit entry.
class schedule_exhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested risk limit can never be reached (e.g. nothing to detect).
class unreachable_limit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Contest id not present in the configuration.
class unknown_contest : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bmda
