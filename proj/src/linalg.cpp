#include "tasqp/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace tasqp::linalg {

RowRangeSolver::RowRangeSolver(const Matrix& J) : J_(J) {
    const auto m = J.rows();
    Matrix gram = J * J.transpose();
    llt_.compute(gram);
    // LLT alone does not reliably reject near-singular Gram matrices, so
    // guard with a diagonal pivot check against the rank tolerance.
    const double scale = J.squaredNorm();
    const double tol = 1e-12 * std::max(scale, 1e-300);
    bool deficient = (llt_.info() != Eigen::Success);
    if (!deficient && m > 0) {
        const Matrix& L = llt_.matrixLLT();
        for (Eigen::Index i = 0; i < m; ++i) {
            if (!(L(i, i) * L(i, i) > tol)) {
                deficient = true;
                break;
            }
        }
    }
    if (deficient) {
        throw RankDeficientError("constraint Jacobian is rank deficient (J J^T singular)");
    }
}

Vector RowRangeSolver::solve(const Vector& w) const {
    if (rows() == 0) return Vector(0);
    return llt_.solve(w);
}

namespace {

Vector projector_apply(const RowRangeSolver& rr, const Vector& v) {
    if (rr.rows() == 0) return v;
    return v - rr.jacobian().transpose() * rr.solve(rr.jacobian() * v);
}

}  // namespace

Vector min_norm_particular(const Matrix& J, const Vector& c) {
    RowRangeSolver rr(J);
    if (rr.rows() == 0) return Vector::Zero(J.cols());
    return -J.transpose() * rr.solve(c);
}

Vector apply_nullspace_projector(const Matrix& J, const Vector& v) {
    RowRangeSolver rr(J);
    return projector_apply(rr, v);
}

KktSolution solve_kkt_projected(const LinearOperator& H_apply, const Matrix& J, const Vector& g,
                                const Vector& c, const CgOptions& opts) {
    const auto n = g.size();
    RowRangeSolver rr(J);

    KktSolution out;
    Vector s_c = (rr.rows() == 0) ? Vector::Zero(n) : (-J.transpose() * rr.solve(c)).eval();

    // Reduced problem: min 1/2 s0' (PHP) s0 + (P(g + H s_c))' s0,
    // solved as (PHP) s0 = -P(g + H s_c) by CG restricted to range(P).
    const Vector pre_projection = (g + H_apply(s_c)).eval();
    Vector rhs = -projector_apply(rr, pre_projection);
    const double rhs_norm = rhs.norm();
    // Floor keeps CG from iterating on projection roundoff when the
    // particular solution is already optimal.
    const double tol_floor = 1e-14 * (1.0 + pre_projection.norm());
    const double tol = std::max(
        (opts.tol > 0.0) ? opts.tol : std::min(1e-10, 0.1 * rhs_norm), tol_floor);
    const int maxit = (opts.max_iterations > 0) ? opts.max_iterations : static_cast<int>(2 * n);

    Vector s0 = Vector::Zero(n);
    Vector r = rhs;
    Vector p = r;
    double rr_dot = r.squaredNorm();
    int it = 0;
    while (std::sqrt(rr_dot) > tol && it < maxit) {
        Vector Hp = projector_apply(rr, H_apply(projector_apply(rr, p)).eval());
        const double curvature = p.dot(Hp);
        const double p_norm2 = p.squaredNorm();
        if (p_norm2 > 0.0) {
            out.min_curvature = std::min(out.min_curvature, curvature / p_norm2);
        }
        if (curvature <= 0.0) {
            out.indefinite = true;
            break;
        }
        const double alpha = rr_dot / curvature;
        s0 += alpha * p;
        r -= alpha * Hp;
        const double rr_next = r.squaredNorm();
        p = r + (rr_next / rr_dot) * p;
        rr_dot = rr_next;
        ++it;
    }

    out.cg_iterations = it;
    out.residual_norm = std::sqrt(rr_dot);
    out.step = s_c + projector_apply(rr, s0);
    if (rr.rows() == 0) {
        out.multiplier = Vector(0);
    } else {
        out.multiplier = rr.solve(J * (g + H_apply(out.step)).eval());
    }
    return out;
}

KktSolution dense_kkt_oracle(const Matrix& H, const Matrix& J, const Vector& g, const Vector& c) {
    const auto n = H.rows();
    const auto m = J.rows();
    Matrix K = Matrix::Zero(n + m, n + m);
    K.topLeftCorner(n, n) = H;
    if (m > 0) {
        K.topRightCorner(n, m) = -J.transpose();
        K.bottomLeftCorner(m, n) = J;
    }
    Vector rhs(n + m);
    rhs.head(n) = -g;
    if (m > 0) rhs.tail(m) = -c;

    Eigen::FullPivLU<Matrix> lu(K);
    if (!lu.isInvertible()) {
        throw SingularKktError("dense KKT system is singular");
    }
    Vector sol = lu.solve(rhs);

    KktSolution out;
    out.step = sol.head(n);
    out.multiplier = sol.tail(m);
    out.residual_norm = (K * sol - rhs).norm();
    return out;
}

Matrix orthonormalize(const std::vector<Vector>& columns, double drop_tol) {
    if (columns.empty()) return Matrix(0, 0);
    const auto n = columns.front().size();

    std::vector<Vector> basis;
    basis.reserve(columns.size());
    for (const Vector& col : columns) {
        const double original_norm = col.norm();
        if (!(original_norm > 0.0)) continue;
        Vector w = col;
        // MGS sweep plus one reorthogonalization pass.
        for (int pass = 0; pass < 2; ++pass) {
            for (const Vector& q : basis) {
                w -= q.dot(w) * q;
            }
        }
        const double residual_norm = w.norm();
        if (residual_norm < drop_tol * original_norm) continue;
        basis.push_back(w / residual_norm);
    }

    Matrix Q(n, static_cast<Eigen::Index>(basis.size()));
    for (Eigen::Index j = 0; j < Q.cols(); ++j) Q.col(j) = basis[static_cast<size_t>(j)];
    return Q;
}

}  // namespace tasqp::linalg
