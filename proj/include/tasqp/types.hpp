#pragma once

#include <Eigen/Core>

#include <atomic>
#include <functional>

namespace tasqp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Matrix-free symmetric operator v -> H v.
using LinearOperator = std::function<Vector(const Vector&)>;

/// Snapshot of evaluation counters at a point in time.
struct EvalCounts {
    long objective = 0;        // f or m evaluations
    long constraint = 0;       // c or h evaluations
    long gradient = 0;         // gradient evaluations
    long jacobian = 0;         // Jacobian evaluations
    long fom_state = 0;        // nonlinear full-order state solves
    long fom_adjoint = 0;      // full-order adjoint solves
    long fom_sensitivity = 0;  // full-order sensitivity solves
    long rom_solve = 0;        // reduced-order state solves

    long fom_total() const { return fom_state + fom_adjoint + fom_sensitivity; }
};

/// Shared counter; evaluations are const but still tallied.
class EvalCounter {
public:
    void add_objective() const { ++objective_; }
    void add_constraint() const { ++constraint_; }
    void add_gradient() const { ++gradient_; }
    void add_jacobian() const { ++jacobian_; }
    void add_fom_state() const { ++fom_state_; }
    void add_fom_adjoint() const { ++fom_adjoint_; }
    void add_fom_sensitivity(long n = 1) const { fom_sensitivity_ += n; }
    void add_rom_solve() const { ++rom_solve_; }

    EvalCounts snapshot() const {
        EvalCounts c;
        c.objective = objective_.load();
        c.constraint = constraint_.load();
        c.gradient = gradient_.load();
        c.jacobian = jacobian_.load();
        c.fom_state = fom_state_.load();
        c.fom_adjoint = fom_adjoint_.load();
        c.fom_sensitivity = fom_sensitivity_.load();
        c.rom_solve = rom_solve_.load();
        return c;
    }

private:
    mutable std::atomic<long> objective_{0};
    mutable std::atomic<long> constraint_{0};
    mutable std::atomic<long> gradient_{0};
    mutable std::atomic<long> jacobian_{0};
    mutable std::atomic<long> fom_state_{0};
    mutable std::atomic<long> fom_adjoint_{0};
    mutable std::atomic<long> fom_sensitivity_{0};
    mutable std::atomic<long> rom_solve_{0};
};

}  // namespace tasqp
