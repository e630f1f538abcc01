#include "tasqp/model.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "tasqp/errors.hpp"

namespace tasqp {

double merit_error(const TunableModel& model, const Vector& x, double rho) {
    const double ef = model.objective_error(x);
    const double ec = model.constraint_error(x);
    return ef + rho * ec;
}

double omega_bound(double e_val, double omega) {
    if (e_val == 0.0) return 0.0;
    return std::pow(e_val, omega);
}

namespace {

bool ratio_ok(double numerator, double denominator, double threshold, double* ratio) {
    constexpr double kTiny = 1e-14;
    if (denominator < kTiny) {
        // Near-stationarity convention: only a matching tiny numerator passes.
        *ratio = (numerator < kTiny) ? 0.0 : std::numeric_limits<double>::infinity();
        return numerator < kTiny;
    }
    *ratio = numerator / denominator;
    return *ratio <= threshold;
}

}  // namespace

RelErrorCheck check_relative_errors(const TunableModel& model, const ProblemFunctions& problem,
                                    const Vector& x, const Vector& lambda,
                                    const ToleranceLedger& ledger) {
    const Vector grad_m = model.objective_gradient(x);
    const Matrix jac_h = model.constraint_jacobian(x);
    const Vector h = model.constraints(x);

    const Vector grad_f = problem.objective_gradient(x);
    const Matrix jac_c = problem.constraint_jacobian(x);
    const Vector c = problem.constraints(x);

    const double stationarity = (grad_m - jac_h.transpose() * lambda).norm();

    RelErrorCheck out;
    const bool ok_fg =
        ratio_ok((grad_m - grad_f).norm(), stationarity, ledger.tau_fg, &out.ratio_fg);
    double jac_err = 0.0;
    if (jac_h.size() > 0) {
        const Vector sv = Matrix(jac_h - jac_c).jacobiSvd().singularValues();
        if (sv.size() > 0) jac_err = sv(0);
    }
    const bool ok_cg = ratio_ok(jac_err, stationarity, ledger.tau_cg, &out.ratio_cg);
    // Constraint ratio in the 1-norm: the convergence bound chain
    // ||c||_1 <= (tau_c + 1) ||h||_1 is stated in that norm.
    const bool ok_c =
        ratio_ok((h - c).lpNorm<1>(), h.lpNorm<1>(), ledger.tau_c, &out.ratio_c);

    out.pass = ok_fg && ok_cg && ok_c;
    return out;
}

double forcing_value(const ToleranceLedger& ledger, int k) {
    return ledger.r0 * std::pow(ledger.gamma, k);
}

bool cauchy_acceptable(const ToleranceLedger& ledger, double e_at_xC_pow_omega, double r_k,
                       double psi_decrease) {
    const double bound = std::min(r_k, ledger.a2 * (1.0 - ledger.a1) * psi_decrease);
    return e_at_xC_pow_omega <= bound;
}

double next_tolerance(const ToleranceLedger& ledger, double psi_at_xk, double psi_at_xC,
                      double psi_at_xk1, double e_at_xk1_pow_omega, int k) {
    const double r_k = forcing_value(ledger, k);
    const double slack = -e_at_xk1_pow_omega - psi_at_xk1 + psi_at_xC +
                         (1.0 - ledger.a1) * (psi_at_xk - psi_at_xC);
    const double tau = std::min(r_k, slack);
    if (!(tau > 0.0)) {
        throw InfeasibleTolerance("next model tolerance is nonpositive");
    }
    return tau;
}

}  // namespace tasqp
