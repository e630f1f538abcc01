#pragma once

#include <Eigen/LU>

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "tasqp/problem.hpp"

namespace tasqp::providers {

/// Desk-scale PDE control problem: steady viscous Burgers equation on
/// (0,1) with fixed boundary values and a distributed source built from a
/// smooth bump basis,
///     nu y'' - y y' + B u = 0,   y(0) = y_left, y(1) = y_right.
/// Objective: tracking of a target profile plus control regularization.
/// Constraint: the integral of y^2 equals a prescribed target (scalar).
/// All state, adjoint, and sensitivity solves are counted; evaluation
/// results are cached per control point.
class Fom1D : public ProblemFunctions {
public:
    struct Options {
        int grid_size = 200;   ///< interior grid points N
        double viscosity = 0.05;
        int control_dim = 8;   ///< n_u; must be even (paired bump basis)
        double y_left = 1.0;
        double y_right = 0.0;
        double reg_weight = 1e-2;
        double target_value = 0.3;  ///< T_d in the integral constraint
    };

    Fom1D() : Fom1D(Options{}) {}
    explicit Fom1D(Options opts);

    // ProblemFunctions
    int dimension() const override { return opts_.control_dim; }
    int constraint_count() const override { return 1; }
    double objective(const Vector& u) const override;
    Vector constraints(const Vector& u) const override;
    Vector objective_gradient(const Vector& u) const override;
    Matrix constraint_jacobian(const Vector& u) const override;
    bool has_hessian() const override { return true; }
    /// Modified Gauss-Newton operator; the constraint block enters only
    /// with a negative multiplier so the result stays positive definite.
    LinearOperator hessian_operator(const Vector& u, const Vector& lambda) const override;

    const Options& options() const { return opts_; }
    int state_dim() const { return opts_.grid_size; }

    // Counted full-order solves (cached per control point).
    Vector solve_state(const Vector& u) const;
    Vector solve_objective_adjoint(const Vector& u) const;
    Vector solve_constraint_adjoint(const Vector& u) const;
    Matrix solve_sensitivities(const Vector& u) const;

    // Uncounted kernel pieces used by reduced-order models.
    Vector residual(const Vector& y, const Vector& u) const;  ///< R(y; u)
    Matrix state_jacobian(const Vector& y) const;             ///< dR/dy (tridiagonal, dense storage)
    double objective_of_state(const Vector& y, const Vector& u) const;
    double constraint_of_state(const Vector& y) const;
    Vector objective_state_gradient(const Vector& y) const;
    Vector constraint_state_gradient(const Vector& y) const;

    const Matrix& control_map() const { return B_; }       ///< B
    Matrix residual_control_jacobian() const { return scale_ * B_; }  ///< dR/du
    const Matrix& control_gramian() const { return G_; }   ///< bump-basis Gramian
    const Vector& quad_weights() const { return tw_; }     ///< interior trapezoid weights
    const Vector& target_profile() const { return y_d_; }  ///< y_d at interior nodes

private:
    struct Cache {
        Vector y;
        Eigen::PartialPivLU<Matrix> lu;  // factorized dR/dy at y
        bool have_pf = false, have_pc = false, have_sens = false;
        Vector p_f, p_c;
        Matrix sens;  // dy/du
    };

    std::shared_ptr<Cache> entry(const Vector& u) const;
    Vector newton_solve(const Vector& u) const;

    Options opts_;
    double h_ = 0.0;       // grid spacing
    double scale_ = 1.0;   // residual scaling h^2 / nu (keeps entries O(1))
    Matrix B_;
    Matrix G_;
    Vector tw_;
    Vector y_d_;
    Vector grid_;  // interior node coordinates

    mutable std::mutex mutex_;
    mutable std::map<std::vector<double>, std::shared_ptr<Cache>> cache_;
};

/// Paper-style bump pair on (-1, 1): H1 is a flat-topped even bump, H2 an
/// odd bump; both vanish with their first derivative at the endpoints.
double bump_h1(double t);
double bump_h2(double t);

}  // namespace tasqp::providers
