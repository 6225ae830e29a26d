#ifndef PADSHIELD_ERRORS_HPP
#define PADSHIELD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace padshield {

/// Invalid configuration or distribution/machine parameter. Carries the name
/// of the offending field so the CLI can point at it.
class ParamError : public std::invalid_argument {
 public:
  ParamError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Malformed input file. `line` is 1-based; 0 means the whole file.
class ParseError : public std::runtime_error {
 public:
  ParseError(size_t line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                    : what),
        line_(line) {}

  size_t line() const { return line_; }

 private:
  size_t line_;
};

/// Simulation exceeded its event budget (runaway machine).
class BudgetExceeded : public std::runtime_error {
 public:
  explicit BudgetExceeded(uint64_t budget)
      : std::runtime_error("event budget exceeded (" + std::to_string(budget) +
                           " events)") {}
};

}  // namespace padshield

#endif
