#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace parobs {

/// Invalid grid geometry, or a query outside the grid box.
class GridError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Expression syntax error. `offset()` is the byte offset into the source
/// string at which parsing failed.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t offset)
        : std::runtime_error(msg + " (at byte " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Expression evaluation produced an undefined value (log of a negative
/// number, division by zero, ...).
class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A coefficient set violates the non-degeneracy hypotheses, or scenario
/// data violates a precondition of the solve.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The assembled time-step matrix is not a strictly diagonally dominant
/// M-matrix under the requested time step.
class AssemblyError : public std::runtime_error {
public:
    AssemblyError(const std::string& msg, int node, double required_dt)
        : std::runtime_error(msg), node_(node), required_dt_(required_dt) {}

    int node() const noexcept { return node_; }
    double required_dt() const noexcept { return required_dt_; }

private:
    int node_;
    double required_dt_;
};

/// Iterative solve hit its sweep cap before reaching the complementarity
/// tolerance. Carries the last residual and, when known, the time level.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& msg, double residual, int time_level = -1)
        : std::runtime_error(msg), residual_(residual), time_level_(time_level) {}

    double residual() const noexcept { return residual_; }
    int time_level() const noexcept { return time_level_; }

private:
    double residual_;
    int time_level_;
};

/// Root bracketing or tolerance failure in the self-similar profile solve.
class ShootingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Requested analysis window does not fit inside the data box. Carries the
/// largest admissible value of the offending parameter.
class AdmissibilityError : public std::runtime_error {
public:
    AdmissibilityError(const std::string& msg, double max_admissible)
        : std::runtime_error(msg), max_admissible_(max_admissible) {}

    double max_admissible() const noexcept { return max_admissible_; }

private:
    double max_admissible_;
};

/// Configuration file problem; carries the section/key for CLI reporting.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& msg, std::string where)
        : std::runtime_error(msg + " [" + where + "]"), where_(std::move(where)) {}

    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

/// Filesystem failure while writing run artifacts.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace parobs
