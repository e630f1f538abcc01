#include "tasqp/providers/analytic.hpp"

#include <cmath>
#include <stdexcept>

#include "tasqp/sqp_exact.hpp"

namespace tasqp::providers {

AnalyticProblem::AnalyticProblem(std::string id, int n, int m, ObjectiveFn f, ConstraintFn c,
                                 GradientFn grad, JacobianFn jac, Vector start, HessianFn hessian,
                                 std::optional<Vector> x_opt, std::optional<double> lambda_hint)
    : id_(std::move(id)),
      n_(n),
      m_(m),
      f_(std::move(f)),
      c_(std::move(c)),
      grad_(std::move(grad)),
      jac_(std::move(jac)),
      hessian_(std::move(hessian)),
      start_(std::move(start)),
      x_opt_(std::move(x_opt)) {
    if (lambda_hint) {
        Vector lam(m_);
        lam.setConstant(*lambda_hint);
        lambda_opt_ = lam;
    }
}

void AnalyticProblem::set_known_optimum(Vector x_opt, Vector lambda_opt) {
    x_opt_ = std::move(x_opt);
    lambda_opt_ = std::move(lambda_opt);
}

double AnalyticProblem::objective(const Vector& x) const {
    counter_.add_objective();
    return f_(x);
}

Vector AnalyticProblem::constraints(const Vector& x) const {
    counter_.add_constraint();
    return c_(x);
}

Vector AnalyticProblem::objective_gradient(const Vector& x) const {
    counter_.add_gradient();
    return grad_(x);
}

Matrix AnalyticProblem::constraint_jacobian(const Vector& x) const {
    counter_.add_jacobian();
    return jac_(x);
}

LinearOperator AnalyticProblem::hessian_operator(const Vector& x, const Vector& lambda) const {
    if (!hessian_) return [](const Vector& v) { return v; };
    Matrix H = hessian_(x, lambda);
    return [H](const Vector& v) { return Vector(H * v); };
}

std::shared_ptr<AnalyticProblem> make_p1() {
    Vector x_opt(2);
    x_opt << 1.0, 1.0;
    Vector start = Vector::Zero(2);
    return std::make_shared<AnalyticProblem>(
        "p1", 2, 1,
        [](const Vector& x) { return 0.5 * x.squaredNorm(); },
        [](const Vector& x) {
            Vector c(1);
            c(0) = x(0) + x(1) - 2.0;
            return c;
        },
        [](const Vector& x) { return Vector(x); },
        [](const Vector& x) {
            Matrix J(1, x.size());
            J.setOnes();
            return J;
        },
        start,
        [](const Vector& x, const Vector&) { return Matrix(Matrix::Identity(x.size(), x.size())); },
        x_opt, 1.0);
}

std::shared_ptr<AnalyticProblem> make_p2() {
    Vector x_opt(2);
    x_opt << -1.0, -1.0;
    Vector start(2);
    start << -2.0, -1.0;
    return std::make_shared<AnalyticProblem>(
        "p2", 2, 1,
        [](const Vector& x) { return x(0) + x(1); },
        [](const Vector& x) {
            Vector c(1);
            c(0) = x(0) * x(0) + x(1) * x(1) - 2.0;
            return c;
        },
        [](const Vector& x) {
            Vector g(2);
            g << 1.0, 1.0;
            (void)x;
            return g;
        },
        [](const Vector& x) {
            Matrix J(1, 2);
            J << 2.0 * x(0), 2.0 * x(1);
            return J;
        },
        start,
        [](const Vector& x, const Vector& lambda) {
            (void)x;
            const double lam = lambda.size() > 0 ? lambda(0) : 0.0;
            return Matrix(-2.0 * lam * Matrix::Identity(2, 2));
        },
        x_opt, -0.5);
}

namespace {

constexpr int kP3Dim = 10;

Matrix p3_quadratic() {
    Matrix A(kP3Dim, kP3Dim);
    for (int i = 0; i < kP3Dim; ++i) {
        for (int j = 0; j < kP3Dim; ++j) {
            A(i, j) = (i == j) ? 1.0 + i / 5.0 : 0.5 / (1.0 + std::abs(i - j));
        }
    }
    return A;
}

Vector p3_linear() {
    Vector q(kP3Dim);
    for (int i = 0; i < kP3Dim; ++i) q(i) = std::sin(i + 1.0);
    return q;
}

}  // namespace

std::shared_ptr<AnalyticProblem> make_p3() {
    const Matrix A = p3_quadratic();
    const Vector q = p3_linear();

    auto f = [A, q](const Vector& x) {
        double trig = 0.0;
        for (int i = 0; i < kP3Dim; ++i) trig += std::cos(2.0 * x(i));
        return 0.5 * x.dot(A * x) + q.dot(x) + 0.3 * trig;
    };
    auto grad = [A, q](const Vector& x) {
        Vector g = A * x + q;
        for (int i = 0; i < kP3Dim; ++i) g(i) -= 0.6 * std::sin(2.0 * x(i));
        return g;
    };
    auto c = [](const Vector& x) {
        Vector v(3);
        v(0) = x.squaredNorm() / 10.0 - 1.0;
        v(1) = x(0) * x(1) - x(2) + 0.5;
        v(2) = x(3) + x(4) * x(4) + std::sin(x(5)) - 0.7;
        return v;
    };
    auto jac = [](const Vector& x) {
        Matrix J = Matrix::Zero(3, kP3Dim);
        J.row(0) = x.transpose() / 5.0;
        J(1, 0) = x(1);
        J(1, 1) = x(0);
        J(1, 2) = -1.0;
        J(2, 3) = 1.0;
        J(2, 4) = 2.0 * x(4);
        J(2, 5) = std::cos(x(5));
        return J;
    };
    auto hess = [A](const Vector& x, const Vector& lambda) {
        Matrix H = A;
        for (int i = 0; i < kP3Dim; ++i) H(i, i) -= 1.2 * std::cos(2.0 * x(i));
        if (lambda.size() == 3) {
            H -= lambda(0) * Matrix(Matrix::Identity(kP3Dim, kP3Dim) / 5.0);
            H(0, 1) -= lambda(1);
            H(1, 0) -= lambda(1);
            H(4, 4) -= lambda(2) * 2.0;
            H(5, 5) -= lambda(2) * (-std::sin(x(5)));
        }
        return H;
    };

    Vector start(kP3Dim);
    start << 1.5, 1.2, 1.0, 0.8, 0.6, 0.5, 0.9, 1.1, 1.3, 0.7;
    return std::make_shared<AnalyticProblem>("p3", kP3Dim, 3, f, c, grad, jac, start, hess);
}

std::vector<std::shared_ptr<AnalyticProblem>> make_analytic_suite() {
    return {make_p1(), make_p2(), make_p3()};
}

Vector compute_reference_solution(AnalyticProblem& problem, double tol) {
    SolverConfig config;
    config.tol_f = tol;
    config.tol_c = tol;
    config.max_iter = 500;
    config.kkt_via_dense_oracle = true;
    config.hessian_strategy =
        problem.has_hessian() ? HessianStrategy::ProblemSupplied : HessianStrategy::DampedBfgs;
    ExactResult res = solve_exact(problem, problem.default_start(), config);
    if (res.status != SolveStatus::Converged) {
        throw std::runtime_error("reference solve for " + problem.id() + " did not converge: " +
                                 to_string(res.status));
    }
    problem.set_known_optimum(res.state.x, res.state.lambda);
    return res.state.x;
}

}  // namespace tasqp::providers
