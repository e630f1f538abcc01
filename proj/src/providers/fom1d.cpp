#include "tasqp/providers/fom1d.hpp"

#include <cmath>
#include <stdexcept>

#include "tasqp/errors.hpp"

namespace tasqp::providers {

double bump_h1(double t) {
    if (t <= -1.0 || t >= 1.0) return 0.0;
    if (t <= 0.0) return (t + 1.0) * (t + 1.0) * (1.0 - 2.0 * t);
    return (1.0 - t) * (1.0 - t) * (1.0 + 2.0 * t);
}

double bump_h2(double t) {
    if (t <= -1.0 || t >= 1.0) return 0.0;
    if (t <= 0.0) return t * (t + 1.0) * (t + 1.0);
    return t * (1.0 - t) * (1.0 - t);
}

Fom1D::Fom1D(Options opts) : opts_(opts) {
    if (opts_.grid_size < 8) throw std::invalid_argument("grid_size too small");
    if (opts_.control_dim < 2 || opts_.control_dim % 2 != 0) {
        throw std::invalid_argument("control_dim must be even and >= 2");
    }
    const int n = opts_.grid_size;
    const int nu = opts_.control_dim;
    h_ = 1.0 / (n + 1);
    scale_ = h_ * h_ / opts_.viscosity;

    grid_.resize(n);
    for (int i = 0; i < n; ++i) grid_(i) = (i + 1) * h_;

    tw_.setConstant(n, h_);  // interior trapezoid weights

    y_d_.resize(n);
    for (int i = 0; i < n; ++i) y_d_(i) = 1.0 - grid_(i) * grid_(i);

    // Bump basis: H1/H2 pairs at equispaced interior centers.
    const int pairs = nu / 2;
    const double width = 1.0 / (pairs + 1);
    B_.resize(n, nu);
    for (int p = 0; p < pairs; ++p) {
        const double center = (p + 1) * width;
        for (int i = 0; i < n; ++i) {
            const double t = (grid_(i) - center) / width;
            B_(i, 2 * p) = bump_h1(t);
            B_(i, 2 * p + 1) = bump_h2(t);
        }
    }

    G_.resize(nu, nu);
    for (int a = 0; a < nu; ++a) {
        for (int b = 0; b < nu; ++b) {
            G_(a, b) = (B_.col(a).array() * B_.col(b).array() * tw_.array()).sum();
        }
    }
}

Vector Fom1D::residual(const Vector& y, const Vector& u) const {
    const int n = opts_.grid_size;
    const double nu = opts_.viscosity;
    Vector r(n);
    const Vector source = B_ * u;
    for (int i = 0; i < n; ++i) {
        const double ym = (i == 0) ? opts_.y_left : y(i - 1);
        const double yp = (i == n - 1) ? opts_.y_right : y(i + 1);
        const double diff = nu * (ym - 2.0 * y(i) + yp) / (h_ * h_);
        const double conv = y(i) * (yp - ym) / (2.0 * h_);
        r(i) = scale_ * (diff - conv + source(i));
    }
    return r;
}

Matrix Fom1D::state_jacobian(const Vector& y) const {
    const int n = opts_.grid_size;
    const double nu = opts_.viscosity;
    Matrix J = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const double ym = (i == 0) ? opts_.y_left : y(i - 1);
        const double yp = (i == n - 1) ? opts_.y_right : y(i + 1);
        J(i, i) = scale_ * (-2.0 * nu / (h_ * h_) - (yp - ym) / (2.0 * h_));
        if (i > 0) J(i, i - 1) = scale_ * (nu / (h_ * h_) + y(i) / (2.0 * h_));
        if (i < n - 1) J(i, i + 1) = scale_ * (nu / (h_ * h_) - y(i) / (2.0 * h_));
    }
    return J;
}

Vector Fom1D::newton_solve(const Vector& u) const {
    const int n = opts_.grid_size;
    Vector y(n);
    for (int i = 0; i < n; ++i) {
        y(i) = opts_.y_left + (opts_.y_right - opts_.y_left) * grid_(i);
    }

    double r_norm = residual(y, u).norm();
    for (int iter = 0; iter < 60; ++iter) {
        if (r_norm <= 1e-12) return y;
        const Vector r = residual(y, u);
        Eigen::PartialPivLU<Matrix> lu(state_jacobian(y));
        const Vector step = lu.solve(-r);
        double t = 1.0;
        while (t > 1e-6) {
            const Vector y_try = y + t * step;
            const double r_try = residual(y_try, u).norm();
            if (r_try <= (1.0 - 1e-4 * t) * r_norm) {
                y = y_try;
                r_norm = r_try;
                break;
            }
            t *= 0.5;
        }
        if (t <= 1e-6) {
            throw FomSolveFailure("state Newton stalled");
        }
    }
    if (r_norm <= 1e-12) return y;
    throw FomSolveFailure("state Newton did not reach tolerance");
}

std::shared_ptr<Fom1D::Cache> Fom1D::entry(const Vector& u) const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::vector<double> key(u.data(), u.data() + u.size());
    auto it = cache_.find(key);
    if (it == cache_.end()) {
        if (cache_.size() > 512) cache_.clear();
        auto fresh = std::make_shared<Cache>();
        fresh->y = newton_solve(u);
        counter_.add_fom_state();
        fresh->lu.compute(state_jacobian(fresh->y));
        it = cache_.emplace(std::move(key), std::move(fresh)).first;
    }
    return it->second;
}

Vector Fom1D::solve_state(const Vector& u) const { return entry(u)->y; }

Vector Fom1D::solve_objective_adjoint(const Vector& u) const {
    auto c = entry(u);
    std::lock_guard<std::mutex> lock(mutex_);
    if (!c->have_pf) {
        c->p_f = c->lu.transpose().solve(Vector(-objective_state_gradient(c->y)));
        c->have_pf = true;
        counter_.add_fom_adjoint();
    }
    return c->p_f;
}

Vector Fom1D::solve_constraint_adjoint(const Vector& u) const {
    auto c = entry(u);
    std::lock_guard<std::mutex> lock(mutex_);
    if (!c->have_pc) {
        c->p_c = c->lu.transpose().solve(Vector(-constraint_state_gradient(c->y)));
        c->have_pc = true;
        counter_.add_fom_adjoint();
    }
    return c->p_c;
}

Matrix Fom1D::solve_sensitivities(const Vector& u) const {
    auto c = entry(u);
    std::lock_guard<std::mutex> lock(mutex_);
    if (!c->have_sens) {
        c->sens = c->lu.solve(Matrix(-scale_ * B_));
        c->have_sens = true;
        counter_.add_fom_sensitivity(opts_.control_dim);
    }
    return c->sens;
}

double Fom1D::objective_of_state(const Vector& y, const Vector& u) const {
    const Vector d = y - y_d_;
    double track = (tw_.array() * d.array().square()).sum();
    // Boundary contributions are constants (y fixed there, y_d matches the
    // boundary values by construction) and are omitted.
    return 0.5 * track + 0.5 * opts_.reg_weight * u.dot(G_ * u);
}

double Fom1D::constraint_of_state(const Vector& y) const {
    const double interior = (tw_.array() * y.array().square()).sum();
    const double boundary =
        0.5 * h_ * (opts_.y_left * opts_.y_left + opts_.y_right * opts_.y_right);
    return interior + boundary - opts_.target_value;
}

Vector Fom1D::objective_state_gradient(const Vector& y) const {
    return (tw_.array() * (y - y_d_).array()).matrix();
}

Vector Fom1D::constraint_state_gradient(const Vector& y) const {
    return (2.0 * tw_.array() * y.array()).matrix();
}

double Fom1D::objective(const Vector& u) const {
    counter_.add_objective();
    return objective_of_state(solve_state(u), u);
}

Vector Fom1D::constraints(const Vector& u) const {
    counter_.add_constraint();
    Vector c(1);
    c(0) = constraint_of_state(solve_state(u));
    return c;
}

Vector Fom1D::objective_gradient(const Vector& u) const {
    counter_.add_gradient();
    const Vector& p = solve_objective_adjoint(u);
    return opts_.reg_weight * (G_ * u) + scale_ * (B_.transpose() * p);
}

Matrix Fom1D::constraint_jacobian(const Vector& u) const {
    counter_.add_jacobian();
    const Vector& p = solve_constraint_adjoint(u);
    Matrix J(1, opts_.control_dim);
    J.row(0) = (scale_ * (B_.transpose() * p)).transpose();
    return J;
}

LinearOperator Fom1D::hessian_operator(const Vector& u, const Vector& lambda) const {
    const Matrix& sens = solve_sensitivities(u);
    const double lam = lambda.size() > 0 ? lambda(0) : 0.0;
    const double constraint_factor = (lam < 0.0) ? -2.0 * lam : 0.0;
    const Matrix G = G_;
    const Vector tw = tw_;
    const double reg = opts_.reg_weight;
    return [sens, G, tw, reg, constraint_factor](const Vector& v) {
        const Vector yv = sens * v;
        const Vector weighted = (tw.array() * yv.array()).matrix();
        return Vector((1.0 + constraint_factor) * (sens.transpose() * weighted) + reg * (G * v));
    };
}

}  // namespace tasqp::providers
