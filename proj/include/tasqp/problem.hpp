#pragma once

#include "tasqp/types.hpp"

namespace tasqp {

/// Evaluation contract for the true problem: f, c and first derivatives.
/// Implementations may be backed by closed forms or by full-order PDE
/// solves; either way evaluations are const and safe for concurrent
/// read-only use (counters are atomic).
class ProblemFunctions {
public:
    virtual ~ProblemFunctions() = default;

    virtual int dimension() const = 0;
    virtual int constraint_count() const = 0;

    virtual double objective(const Vector& x) const = 0;
    virtual Vector constraints(const Vector& x) const = 0;
    virtual Vector objective_gradient(const Vector& x) const = 0;
    virtual Matrix constraint_jacobian(const Vector& x) const = 0;

    /// Symmetric operator replacing the Lagrangian Hessian (convention
    /// L = f - lambda' c). Only consulted when has_hessian() is true.
    virtual bool has_hessian() const { return false; }
    virtual LinearOperator hessian_operator(const Vector& /*x*/, const Vector& /*lambda*/) const {
        return [](const Vector& v) { return v; };
    }

    const EvalCounter& counter() const { return counter_; }

protected:
    EvalCounter counter_;
};

}  // namespace tasqp
