#pragma once

#include <algorithm>
#include <cmath>

#include "tasqp/model.hpp"
#include "tasqp/sqp_inexact.hpp"

namespace tasqp::testutil {

/// Post-hoc verification of the per-iteration decrease conditions from a
/// completed model-driver run. Returns the number of violations across
/// all outer iterations that carry a condition payload.
inline int count_condition_violations(const InexactResult& result, const ToleranceLedger& ledger,
                                      double slack = 1e-9) {
    int violations = 0;
    for (const OuterRecord& r : result.outer_records) {
        if (std::isnan(r.psi_k_at_xk)) continue;  // final record has no step payload
        const double decrease = r.psi_k_at_xk - r.psi_k_at_xC;
        const double scale = slack * (1.0 + std::abs(r.psi_k_at_xk) + std::abs(r.psi_k_at_xC));

        // psi_k(x_{k+1}) <= psi_k(x_C)
        if (r.psi_k_at_xk1 > r.psi_k_at_xC + scale) ++violations;
        // e_k(x_{k+1})^omega <= a2 (1-a1) (psi_k(x_k) - psi_k(x_C))
        if (omega_bound(r.e_k_at_xk1, ledger.omega) >
            ledger.a2 * (1.0 - ledger.a1) * decrease + scale) {
            ++violations;
        }
        // e_k(x_{k+1})^omega <= r_k
        if (omega_bound(r.e_k_at_xk1, ledger.omega) > r.r_k + scale) ++violations;
        // Cauchy acceptance e_k(x_C)^omega <= min{r_k, a2 (1-a1) decrease}
        if (omega_bound(r.e_k_at_xC, ledger.omega) >
            std::min(r.r_k, ledger.a2 * (1.0 - ledger.a1) * decrease) + scale) {
            ++violations;
        }
        // Ideal decrease: psi_k(x_k) - psi_{k+1}(x_{k+1}) >= a1 * decrease
        if (!std::isnan(r.psi_k1_at_xk1) &&
            r.psi_k_at_xk - r.psi_k1_at_xk1 < ledger.a1 * decrease - scale) {
            ++violations;
        }
        // Tolerance chain
        if (!(r.tau_next > 0.0) || r.tau_next > r.r_k + scale) ++violations;
        if (!std::isnan(r.e_k1_at_xk1) && r.e_k1_at_xk1 > r.tau_next * (1.0 + 1e-8) + scale) {
            ++violations;
        }
    }
    return violations;
}

/// Final-iterate bound chain relating true and model FONC residuals
/// through the relative-error thresholds.
inline bool theorem2_chain_holds(const InexactResult& result, const ToleranceLedger& ledger,
                                 const ProblemFunctions& problem) {
    if (result.outer_records.empty() || result.state.lambda.size() == 0) return false;
    const OuterRecord& last = result.outer_records.back();
    const Vector& x = result.state.x;
    const Vector& lambda = result.state.lambda;
    const double true_stat =
        (problem.objective_gradient(x) - problem.constraint_jacobian(x).transpose() * lambda)
            .norm();
    const double true_feas = problem.constraints(x).lpNorm<1>();
    const double stat_bound =
        (ledger.tau_fg + 1.0 + ledger.tau_cg * lambda.norm()) * last.model_stationarity + 1e-12;
    const double feas_bound = (ledger.tau_c + 1.0) * last.model_feasibility + 1e-12;
    return true_stat <= stat_bound && true_feas <= feas_bound;
}

}  // namespace tasqp::testutil
