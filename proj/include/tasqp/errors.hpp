#pragma once

#include <stdexcept>
#include <string>

namespace tasqp {

/// Constraint Jacobian (or JJ^T system) numerically rank deficient.
struct RankDeficientError : std::runtime_error {
    explicit RankDeficientError(const std::string& what) : std::runtime_error(what) {}
};

/// Dense KKT block system is singular.
struct SingularKktError : std::runtime_error {
    explicit SingularKktError(const std::string& what) : std::runtime_error(what) {}
};

/// Backtracking exhausted its trial budget without an acceptable step.
struct LineSearchFailure : std::runtime_error {
    LineSearchFailure(const std::string& what, int trials_)
        : std::runtime_error(what), trials(trials_) {}
    int trials;
};

/// Model refinement loop exceeded its per-iteration budget.
struct RefinementBudgetExhausted : std::runtime_error {
    explicit RefinementBudgetExhausted(const std::string& what) : std::runtime_error(what) {}
};

/// next_tolerance produced a nonpositive value; indicates a driver logic bug.
struct InfeasibleTolerance : std::logic_error {
    explicit InfeasibleTolerance(const std::string& what) : std::logic_error(what) {}
};

/// Provider cannot build a model meeting the requested tolerance.
struct CannotMeetTolerance : std::runtime_error {
    explicit CannotMeetTolerance(const std::string& what) : std::runtime_error(what) {}
};

/// Full-order state/adjoint/sensitivity solve failed to converge.
struct FomSolveFailure : std::runtime_error {
    explicit FomSolveFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid or unparsable run configuration.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed history file; carries the 1-based offending line.
struct ParseError : std::runtime_error {
    ParseError(const std::string& what, long line_) : std::runtime_error(what), line(line_) {}
    long line;
};

}  // namespace tasqp
