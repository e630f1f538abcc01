#include "tasqp/sqp_exact.hpp"

#include <algorithm>
#include <cmath>

namespace tasqp {

namespace {
constexpr double kCurvatureFloor = 1e-8;  // h_l
}

const char* to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Converged: return "Converged";
        case SolveStatus::MaxIter: return "MaxIter";
        case SolveStatus::LineSearchFailure: return "LineSearchFailure";
        case SolveStatus::RankDeficient: return "RankDeficient";
        case SolveStatus::RefinementBudgetExhausted: return "RefinementBudgetExhausted";
    }
    return "Unknown";
}

const char* to_string(HessianStrategy strategy) {
    switch (strategy) {
        case HessianStrategy::Identity: return "identity";
        case HessianStrategy::DampedBfgs: return "damped-bfgs";
        case HessianStrategy::ProblemSupplied: return "problem";
    }
    return "unknown";
}

void BfgsHessian::update(const Vector& s, const Vector& y) {
    const double sHs = s.dot(H_ * s);
    if (!(sHs > 0.0) || !(s.squaredNorm() > 0.0)) return;  // degenerate pair, keep H
    const double sy = s.dot(y);
    // Powell damping: blend y toward H s until s'r >= 0.2 s'H s.
    Vector r = y;
    if (sy < 0.2 * sHs) {
        const double theta = 0.8 * sHs / (sHs - sy);
        r = theta * y + (1.0 - theta) * (H_ * s);
    }
    const double sr = s.dot(r);
    if (!(sr > 0.0)) return;
    Vector Hs = H_ * s;
    H_ += -(Hs * Hs.transpose()) / sHs + (r * r.transpose()) / sr;
}

Vector initial_multiplier(const Vector& grad_f, const Matrix& J) {
    linalg::RowRangeSolver rr(J);
    if (rr.rows() == 0) return Vector(0);
    return rr.solve(J * grad_f);
}

LinearOperator hessian_apply(HessianStrategy strategy, const ProblemFunctions& problem,
                             const Vector& x, const Vector& lambda, const BfgsHessian* bfgs,
                             double levenberg_shift) {
    switch (strategy) {
        case HessianStrategy::Identity:
            return [](const Vector& v) { return v; };
        case HessianStrategy::DampedBfgs:
            if (bfgs == nullptr) return [](const Vector& v) { return v; };
            return bfgs->op();
        case HessianStrategy::ProblemSupplied: {
            if (!problem.has_hessian()) return [](const Vector& v) { return v; };
            LinearOperator base = problem.hessian_operator(x, lambda);
            if (levenberg_shift <= 0.0) return base;
            const double shift = levenberg_shift;
            return [base, shift](const Vector& v) { return Vector(base(v) + shift * v); };
        }
    }
    return [](const Vector& v) { return v; };
}

linalg::KktSolution solve_step_safeguarded(
    const std::function<LinearOperator(double shift)>& make_op, const Matrix& J, const Vector& g,
    const Vector& c, const linalg::CgOptions& cg, double* shift_io) {
    double shift = shift_io ? *shift_io : 0.0;
    linalg::KktSolution kkt;
    for (int attempt = 0; attempt < 6; ++attempt) {
        kkt = linalg::solve_kkt_projected(make_op(shift), J, g, c, cg);
        if (!kkt.indefinite) {
            // Decay the shift so a large early escalation cannot slow
            // later iterations where the operator is well conditioned.
            if (shift_io) *shift_io = (shift < kCurvatureFloor) ? 0.0 : 0.1 * shift;
            return kkt;
        }
        const double deficit = kCurvatureFloor - kkt.min_curvature;
        shift = 2.0 * shift + 1.5 * std::max(deficit, kCurvatureFloor);
    }
    // Escalation failed; keep the truncated-CG step (flag stays set).
    if (shift_io) *shift_io = shift;
    return kkt;
}

ExactResult solve_exact(const ProblemFunctions& problem, const Vector& x0,
                        const SolverConfig& config) {
    const int n = problem.dimension();

    ExactResult result;
    result.state.x = x0;
    result.state.rho = merit::PenaltyState{config.rho0, config.sigma, {}};
    result.status = SolveStatus::MaxIter;

    BfgsHessian bfgs(n);
    bool have_lambda = false;
    Vector lambda;
    if (config.lambda0) {
        lambda = *config.lambda0;
        have_lambda = true;
    }
    double shift = 0.0;

    Vector grad = problem.objective_gradient(result.state.x);
    Matrix J = problem.constraint_jacobian(result.state.x);

    for (int k = 0; k <= config.max_iter; ++k) {
        const double f_val = problem.objective(result.state.x);
        const Vector c_val = problem.constraints(result.state.x);

        if (!have_lambda) {
            try {
                lambda = initial_multiplier(grad, J);
            } catch (const RankDeficientError&) {
                result.status = SolveStatus::RankDeficient;
                break;
            }
            have_lambda = true;
        }

        IterationRecord rec;
        rec.k = k;
        rec.stationarity = (grad - J.transpose() * lambda).norm();
        rec.feasibility = c_val.lpNorm<1>();
        rec.rho = result.state.rho.rho;
        rec.merit = merit::merit_value(f_val, c_val, rec.rho);

        if (rec.stationarity < config.tol_f && rec.feasibility < config.tol_c) {
            rec.evals = problem.counter().snapshot();
            result.records.push_back(rec);
            result.status = SolveStatus::Converged;
            break;
        }
        if (k == config.max_iter) {
            rec.evals = problem.counter().snapshot();
            result.records.push_back(rec);
            result.status = SolveStatus::MaxIter;
            break;
        }

        linalg::KktSolution kkt;
        try {
            if (config.kkt_via_dense_oracle) {
                Matrix H = Matrix::Identity(n, n);
                const LinearOperator op =
                    hessian_apply(config.hessian_strategy, problem, result.state.x, lambda,
                                  &bfgs, shift);
                for (int j = 0; j < n; ++j) H.col(j) = op(Vector::Unit(n, j));
                kkt = linalg::dense_kkt_oracle(H, J, grad, c_val);
            } else {
                const Vector x_here = result.state.x;
                const Vector lambda_here = lambda;
                auto make_op = [&](double mu) {
                    return hessian_apply(config.hessian_strategy, problem, x_here, lambda_here,
                                         &bfgs, mu);
                };
                kkt = solve_step_safeguarded(make_op, J, grad, c_val, config.cg, &shift);
            }
        } catch (const RankDeficientError&) {
            rec.evals = problem.counter().snapshot();
            result.records.push_back(rec);
            result.status = SolveStatus::RankDeficient;
            break;
        } catch (const SingularKktError&) {
            rec.evals = problem.counter().snapshot();
            result.records.push_back(rec);
            result.status = SolveStatus::RankDeficient;
            break;
        }

        lambda = kkt.multiplier;
        result.state.rho =
            merit::update_penalty(result.state.rho, lambda.lpNorm<Eigen::Infinity>());
        const double rho = result.state.rho.rho;
        rec.rho = rho;
        rec.merit = merit::merit_value(f_val, c_val, rho);

        const Vector s = kkt.step;
        const double D = merit::merit_directional_derivative(grad, s, c_val, rho);
        const double phi0 = rec.merit;

        const Vector x_base = result.state.x;
        auto phi = [&](double alpha) {
            const Vector xt = x_base + alpha * s;
            return merit::merit_value(problem.objective(xt), problem.constraints(xt), rho);
        };

        merit::LineSearchResult ls;
        try {
            ls = merit::backtracking_search(phi, phi0, D, config.line_search);
        } catch (const LineSearchFailure&) {
            rec.evals = problem.counter().snapshot();
            result.records.push_back(rec);
            result.status = SolveStatus::LineSearchFailure;
            break;
        }

        rec.alpha = ls.alpha;
        rec.step_norm = ls.alpha * s.norm();
        rec.cg_iterations = kkt.cg_iterations;

        result.state.x = x_base + ls.alpha * s;
        result.state.k = k + 1;
        if (!result.state.x.allFinite()) {
            rec.evals = problem.counter().snapshot();
            result.records.push_back(rec);
            result.status = SolveStatus::LineSearchFailure;
            break;
        }

        Vector grad_next = problem.objective_gradient(result.state.x);
        Matrix J_next = problem.constraint_jacobian(result.state.x);

        if (config.hessian_strategy == HessianStrategy::DampedBfgs) {
            const Vector step = ls.alpha * s;
            const Vector y = (grad_next - J_next.transpose() * lambda) -
                             (grad - J.transpose() * lambda);
            bfgs.update(step, y);
        }

        grad = grad_next;
        J = J_next;

        rec.evals = problem.counter().snapshot();
        result.records.push_back(rec);
    }

    result.state.lambda = lambda;
    result.state.eval_counts = problem.counter().snapshot();
    return result;
}

}  // namespace tasqp
