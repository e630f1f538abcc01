#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tasqp/problem.hpp"

namespace tasqp::providers {

/// Closed-form equality-constrained test problem. Optionally carries its
/// known optimum and a dense Lagrangian Hessian (convention
/// L = f - lambda' c).
class AnalyticProblem : public ProblemFunctions {
public:
    using ObjectiveFn = std::function<double(const Vector&)>;
    using ConstraintFn = std::function<Vector(const Vector&)>;
    using GradientFn = std::function<Vector(const Vector&)>;
    using JacobianFn = std::function<Matrix(const Vector&)>;
    using HessianFn = std::function<Matrix(const Vector&, const Vector&)>;

    AnalyticProblem(std::string id, int n, int m, ObjectiveFn f, ConstraintFn c, GradientFn grad,
                    JacobianFn jac, Vector start, HessianFn hessian = {},
                    std::optional<Vector> x_opt = {}, std::optional<double> lambda_hint = {});

    const std::string& id() const { return id_; }
    const Vector& default_start() const { return start_; }
    const std::optional<Vector>& known_optimum() const { return x_opt_; }
    const std::optional<Vector>& known_multiplier() const { return lambda_opt_; }
    void set_known_optimum(Vector x_opt, Vector lambda_opt);

    int dimension() const override { return n_; }
    int constraint_count() const override { return m_; }
    double objective(const Vector& x) const override;
    Vector constraints(const Vector& x) const override;
    Vector objective_gradient(const Vector& x) const override;
    Matrix constraint_jacobian(const Vector& x) const override;
    bool has_hessian() const override { return static_cast<bool>(hessian_); }
    LinearOperator hessian_operator(const Vector& x, const Vector& lambda) const override;

private:
    std::string id_;
    int n_, m_;
    ObjectiveFn f_;
    ConstraintFn c_;
    GradientFn grad_;
    JacobianFn jac_;
    HessianFn hessian_;
    Vector start_;
    std::optional<Vector> x_opt_;
    std::optional<Vector> lambda_opt_;
};

/// P1: min 1/2 ||x||^2  s.t. x1 + x2 = 2           (optimum (1,1), lambda 1)
/// P2: min x1 + x2      s.t. x1^2 + x2^2 = 2       (optimum (-1,-1), lambda -1/2)
/// P3: 10 variables, 3 constraints, nonconvex; reference solution is
///     computed on demand by the dense-oracle exact solver.
std::vector<std::shared_ptr<AnalyticProblem>> make_analytic_suite();

std::shared_ptr<AnalyticProblem> make_p1();
std::shared_ptr<AnalyticProblem> make_p2();
std::shared_ptr<AnalyticProblem> make_p3();

/// Tight-tolerance reference solve for problems without a closed-form
/// optimum; verifies the FONC residual and stores the result on the
/// problem. Returns the reference point.
Vector compute_reference_solution(AnalyticProblem& problem, double tol = 1e-12);

}  // namespace tasqp::providers
