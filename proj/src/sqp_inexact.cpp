#include "tasqp/sqp_inexact.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tasqp {

namespace {

LinearOperator model_hessian_op(HessianStrategy strategy, const TunableModel& model,
                                const Vector& x, const Vector& lambda, const BfgsHessian* bfgs,
                                double shift) {
    switch (strategy) {
        case HessianStrategy::Identity:
            return [](const Vector& v) { return v; };
        case HessianStrategy::DampedBfgs:
            if (bfgs == nullptr) return [](const Vector& v) { return v; };
            return bfgs->op();
        case HessianStrategy::ProblemSupplied: {
            if (!model.has_hessian()) return [](const Vector& v) { return v; };
            LinearOperator base = model.hessian_operator(x, lambda);
            if (shift <= 0.0) return base;
            return [base, shift](const Vector& v) { return Vector(base(v) + shift * v); };
        }
    }
    return [](const Vector& v) { return v; };
}

double model_merit(const TunableModel& model, const Vector& x, double rho) {
    return model.objective(x) + rho * model.constraints(x).lpNorm<1>();
}

/// Build-point tolerance plus relative-error gates, retrying through the
/// provider's refine until both hold or the budget is spent.
ModelPtr build_with_gates(ModelProvider& provider, const Vector& x, double tau, double rho,
                          Vector lambda, const ToleranceLedger& ledger, int budget,
                          int* refinements_used) {
    ModelPtr model = provider.build(x, tau, rho, lambda);
    for (int attempt = 0;; ++attempt) {
        Vector lam = lambda;
        if (lam.size() == 0) {
            lam = initial_multiplier(model->objective_gradient(x), model->constraint_jacobian(x));
        }
        const bool tol_ok = merit_error(*model, x, rho) <= tau * (1.0 + 1e-9);
        const bool gates_ok =
            check_relative_errors(*model, provider.truth(), x, lam, ledger).pass;
        if (tol_ok && gates_ok) return model;
        if (attempt >= budget) {
            throw RefinementBudgetExhausted("model build could not meet tolerance and gates");
        }
        model = provider.refine(*model, x, tau, rho, lam);
        if (refinements_used) ++(*refinements_used);
    }
}

}  // namespace

const char* to_string(SubminExit exit) {
    switch (exit) {
        case SubminExit::ModelStationary: return "ModelStationary";
        case SubminExit::PenaltyRaised: return "PenaltyRaised";
        case SubminExit::ConstraintBound: return "ConstraintBound";
        case SubminExit::MaxInner: return "MaxInner";
    }
    return "Unknown";
}

CauchyResult compute_cauchy_point(ModelProvider& provider, ModelPtr& model,
                                  const ToleranceLedger& ledger, double tau_k, double r_k,
                                  const Vector& x_k, const Vector& lambda_k,
                                  const merit::PenaltyState& rho_state,
                                  const InexactConfig& config) {
    merit::PenaltyState rho = rho_state;
    const double contraction =
        0.5 * (config.base.line_search.beta1 + config.base.line_search.beta2);

    Vector refine_point = x_k;
    int refinements = 0;
    for (int i = 0; i <= config.max_refinements; ++i) {
        if (i > 0) {
            model = provider.refine(*model, refine_point, tau_k, rho.rho, lambda_k);
            ++refinements;
            // The refined model must still satisfy the build-point contract.
            const bool tol_ok = merit_error(*model, x_k, rho.rho) <= tau_k * (1.0 + 1e-9);
            const bool gates_ok =
                check_relative_errors(*model, provider.truth(), x_k, lambda_k, ledger).pass;
            if (!tol_ok || !gates_ok) {
                refine_point = x_k;
                continue;
            }
        }

        const Vector grad_m = model->objective_gradient(x_k);
        const Matrix jac_h = model->constraint_jacobian(x_k);
        const Vector h = model->constraints(x_k);
        const double m_val = model->objective(x_k);

        double shift = 0.0;
        const TunableModel& m_ref = *model;
        auto make_op = [&](double mu) {
            return model_hessian_op(config.base.hessian_strategy, m_ref, x_k, lambda_k, nullptr,
                                    mu);
        };
        linalg::KktSolution kkt =
            solve_step_safeguarded(make_op, jac_h, grad_m, h, config.base.cg, &shift);

        rho = merit::update_penalty(rho, kkt.multiplier.lpNorm<Eigen::Infinity>());
        const double rho_k = rho.rho;

        const double psi0 = merit::merit_value(m_val, h, rho_k);
        const double D = merit::merit_directional_derivative(grad_m, kkt.step, h, rho_k);

        const Vector s = kkt.step;
        auto psi = [&](double alpha) {
            const Vector xt = x_k + alpha * s;
            return model_merit(m_ref, xt, rho_k);
        };
        const merit::LineSearchResult ls =
            merit::backtracking_search(psi, psi0, D, config.base.line_search);

        double alpha = ls.alpha;
        Vector x_C = x_k + alpha * s;
        double psi_C = ls.merit_at_alpha;

        // Cauchy acceptance, with extra backsteps before paying for a
        // refinement.
        for (int b = 0; b <= config.extra_backsteps; ++b) {
            const double decrease = psi0 - psi_C;
            const double e_C = merit_error(m_ref, x_C, rho_k);
            const double eo = omega_bound(e_C, ledger.omega);
            if (cauchy_acceptable(ledger, eo, r_k, decrease)) {
                CauchyResult out;
                out.x_C = x_C;
                out.s0 = s;
                out.alpha0 = alpha;
                out.lambda_next = kkt.multiplier;
                out.rho = rho;
                out.refinements_used = refinements;
                out.cg_iterations = kkt.cg_iterations;
                out.psi_at_xk = psi0;
                out.psi_at_xC = psi_C;
                out.e_at_xC = e_C;
                out.r_k = r_k;
                return out;
            }
            if (b == config.extra_backsteps) break;
            // Halve; only a step that still satisfies sufficient decrease
            // may become the new candidate.
            alpha *= contraction;
            const Vector x_try = x_k + alpha * s;
            const double psi_try = model_merit(m_ref, x_try, rho_k);
            if (psi_try <= psi0 + config.base.line_search.c1 * alpha * D) {
                x_C = x_try;
                psi_C = psi_try;
            }
        }
        refine_point = x_C;
    }
    throw RefinementBudgetExhausted("Cauchy point refinement budget exhausted");
}

SubminResult solve_submin(const TunableModel& model, const ToleranceLedger& ledger,
                          const CauchyResult& cauchy, const InexactConfig& config) {
    const double rho_k = cauchy.rho.rho;
    const double cauchy_decrease = cauchy.psi_at_xk - cauchy.psi_at_xC;
    const double budget =
        std::min(cauchy.r_k, ledger.a2 * (1.0 - ledger.a1) * cauchy_decrease);

    SubminResult out;
    out.x_next = cauchy.x_C;
    out.lambda_last = cauchy.lambda_next;
    out.exit = SubminExit::MaxInner;

    merit::PenaltyState rho_inner{rho_k, cauchy.rho.sigma, {}};
    BfgsHessian bfgs(static_cast<int>(cauchy.x_C.size()));
    Vector x_j = cauchy.x_C;
    Vector lambda_j = cauchy.lambda_next;
    Vector grad_prev, jacl_prev;  // for BFGS pairs

    for (int j = 0; j < config.max_inner; ++j) {
        const Vector grad_m = model.objective_gradient(x_j);
        const Matrix jac_h = model.constraint_jacobian(x_j);
        const Vector h = model.constraints(x_j);
        const double m_val = model.objective(x_j);

        InnerRecord rec;
        rec.j = j;
        rec.stationarity = (grad_m - jac_h.transpose() * lambda_j).norm();
        rec.feasibility = h.lpNorm<1>();
        rec.rho = rho_inner.rho;
        rec.psi = merit::merit_value(m_val, h, rho_inner.rho);

        if (rec.stationarity < config.base.tol_f && rec.feasibility < config.base.tol_c) {
            out.inner_records.push_back(rec);
            out.exit = SubminExit::ModelStationary;
            break;
        }

        double shift = 0.0;
        auto make_op = [&](double mu) {
            return model_hessian_op(config.base.hessian_strategy, model, x_j, lambda_j, &bfgs,
                                    mu);
        };
        linalg::KktSolution kkt;
        try {
            kkt = solve_step_safeguarded(make_op, jac_h, grad_m, h, config.base.cg, &shift);
        } catch (const RankDeficientError&) {
            out.inner_records.push_back(rec);
            out.exit = SubminExit::ConstraintBound;
            break;
        }

        lambda_j = kkt.multiplier;
        rho_inner = merit::update_penalty(rho_inner, lambda_j.lpNorm<Eigen::Infinity>());
        rec.rho = rho_inner.rho;
        const double psi0 = merit::merit_value(m_val, h, rho_inner.rho);
        rec.psi = psi0;
        const double D =
            merit::merit_directional_derivative(grad_m, kkt.step, h, rho_inner.rho);

        const Vector s = kkt.step;
        const Vector x_base = x_j;
        auto psi = [&](double alpha) {
            return model_merit(model, x_base + alpha * s, rho_inner.rho);
        };
        auto error_budget_ok = [&](double alpha) {
            const double e =
                merit_error(model, (x_base + alpha * s).eval(), rho_k);
            return omega_bound(e, ledger.omega) <= budget;
        };

        merit::LineSearchResult ls;
        try {
            ls = merit::backtracking_search(psi, psi0, D, config.base.line_search,
                                            error_budget_ok);
        } catch (const LineSearchFailure&) {
            // The budget constraint blocked every step; the last iterate
            // (at worst the Cauchy point) remains feasible for it.
            out.inner_records.push_back(rec);
            out.exit = SubminExit::ConstraintBound;
            break;
        }

        rec.alpha = ls.alpha;
        const Vector candidate = x_base + ls.alpha * s;

        // A raised penalty no longer controls psi_k(.; rho_k); stop and
        // discard the step the moment it loses the Cauchy-level merit.
        if (rho_inner.rho > rho_k &&
            model_merit(model, candidate, rho_k) > cauchy.psi_at_xC) {
            out.inner_records.push_back(rec);
            out.exit = SubminExit::PenaltyRaised;
            break;
        }

        if (config.base.hessian_strategy == HessianStrategy::DampedBfgs) {
            const Vector grad_next = model.objective_gradient(candidate);
            const Matrix jac_next = model.constraint_jacobian(candidate);
            const Vector y = (grad_next - jac_next.transpose() * lambda_j) -
                             (grad_m - jac_h.transpose() * lambda_j);
            bfgs.update(candidate - x_base, y);
        }

        x_j = candidate;
        out.x_next = x_j;
        out.lambda_last = lambda_j;
        out.inner_records.push_back(rec);
    }

    return out;
}

InexactResult solve_inexact(ModelProvider& provider, const ProblemFunctions& problem,
                            const Vector& x0, const ToleranceLedger& ledger,
                            const InexactConfig& config) {
    InexactResult result;
    result.state.x = x0;
    result.state.rho = merit::PenaltyState{config.base.rho0, config.base.sigma, {}};
    result.status = SolveStatus::MaxIter;

    double tau = ledger.tau_current;
    Vector lambda;  // empty until estimated

    ModelPtr model;
    int build_refines = 0;
    try {
        model = build_with_gates(provider, result.state.x, tau, result.state.rho.rho, lambda,
                                 ledger, config.max_refinements, &build_refines);
    } catch (const RefinementBudgetExhausted&) {
        result.status = SolveStatus::RefinementBudgetExhausted;
        result.state.eval_counts = problem.counter().snapshot();
        return result;
    } catch (const CannotMeetTolerance&) {
        result.status = SolveStatus::RefinementBudgetExhausted;
        result.state.eval_counts = problem.counter().snapshot();
        return result;
    } catch (const RankDeficientError&) {
        result.status = SolveStatus::RankDeficient;
        result.state.eval_counts = problem.counter().snapshot();
        return result;
    }

    for (int k = 0; k <= config.base.max_iter; ++k) {
        const Vector grad_m = model->objective_gradient(result.state.x);
        const Matrix jac_h = model->constraint_jacobian(result.state.x);
        const Vector h = model->constraints(result.state.x);
        const double m_val = model->objective(result.state.x);

        if (lambda.size() == 0) {
            lambda = initial_multiplier(grad_m, jac_h);
        }

        OuterRecord rec;
        rec.k = k;
        rec.model_stationarity = (grad_m - jac_h.transpose() * lambda).norm();
        rec.model_feasibility = h.lpNorm<1>();
        rec.rho = result.state.rho.rho;
        rec.merit = merit::merit_value(m_val, h, rec.rho);
        rec.tau_k = tau;
        rec.refinements_used = build_refines;
        rec.basis_size = model->reduced_dimension();
        build_refines = 0;

        if (config.instrument_truth) {
            const Vector grad_f = problem.objective_gradient(result.state.x);
            const Matrix jac_c = problem.constraint_jacobian(result.state.x);
            const Vector c = problem.constraints(result.state.x);
            rec.true_stationarity = (grad_f - jac_c.transpose() * lambda).norm();
            rec.true_feasibility = c.lpNorm<1>();
        }

        if (rec.model_stationarity < config.base.tol_f &&
            rec.model_feasibility < config.base.tol_c) {
            rec.evals = problem.counter().snapshot();
            result.outer_records.push_back(rec);
            result.status = SolveStatus::Converged;
            break;
        }
        if (k == config.base.max_iter) {
            rec.evals = problem.counter().snapshot();
            result.outer_records.push_back(rec);
            result.status = SolveStatus::MaxIter;
            break;
        }

        const double r_k = forcing_value(ledger, k);
        rec.r_k = r_k;

        CauchyResult cauchy;
        try {
            cauchy = compute_cauchy_point(provider, model, ledger, tau, r_k, result.state.x,
                                          lambda, result.state.rho, config);
        } catch (const RefinementBudgetExhausted&) {
            rec.evals = problem.counter().snapshot();
            result.outer_records.push_back(rec);
            result.status = SolveStatus::RefinementBudgetExhausted;
            break;
        } catch (const CannotMeetTolerance&) {
            rec.evals = problem.counter().snapshot();
            result.outer_records.push_back(rec);
            result.status = SolveStatus::RefinementBudgetExhausted;
            break;
        } catch (const LineSearchFailure&) {
            rec.evals = problem.counter().snapshot();
            result.outer_records.push_back(rec);
            result.status = SolveStatus::LineSearchFailure;
            break;
        } catch (const RankDeficientError&) {
            rec.evals = problem.counter().snapshot();
            result.outer_records.push_back(rec);
            result.status = SolveStatus::RankDeficient;
            break;
        }

        result.state.rho = cauchy.rho;
        const double rho_k = result.state.rho.rho;
        lambda = cauchy.lambda_next;
        rec.rho = rho_k;
        rec.merit = merit::merit_value(m_val, h, rho_k);
        rec.alpha = cauchy.alpha0;
        rec.refinements_used += cauchy.refinements_used;

        // Below this scale the backtracking cannot certify decrease in
        // floating point and the iteration would spin on null steps.
        if (cauchy.psi_at_xk - cauchy.psi_at_xC <=
            1e-13 * (1.0 + std::abs(cauchy.psi_at_xk))) {
            rec.evals = problem.counter().snapshot();
            result.outer_records.push_back(rec);
            result.status = SolveStatus::LineSearchFailure;
            break;
        }

        SubminResult submin = solve_submin(*model, ledger, cauchy, config);
        lambda = submin.lambda_last;
        const Vector x_next = submin.x_next;
        if (!x_next.allFinite()) {
            rec.evals = problem.counter().snapshot();
            result.outer_records.push_back(rec);
            result.status = SolveStatus::LineSearchFailure;
            break;
        }
        rec.inner_iterations = static_cast<int>(submin.inner_records.size());
        result.inner_histories.push_back(submin.inner_records);

        // Acceptance-time verification of the decrease conditions the
        // subminimization is contracted to maintain.
        const double psi_k_xk1 = model_merit(*model, x_next, rho_k);
        const double e_k_xk1 = merit_error(*model, x_next, rho_k);
        const double eo_k_xk1 = omega_bound(e_k_xk1, ledger.omega);
        const double scale = 1.0 + std::abs(cauchy.psi_at_xk) + std::abs(cauchy.psi_at_xC);
        const double slack = 1e-10 * scale;
        if (psi_k_xk1 > cauchy.psi_at_xC + slack) {
            throw std::logic_error("inner loop violated psi_k(x_{k+1}) <= psi_k(x_C)");
        }
        const double cauchy_decrease = cauchy.psi_at_xk - cauchy.psi_at_xC;
        if (eo_k_xk1 > ledger.a2 * (1.0 - ledger.a1) * cauchy_decrease + slack) {
            throw std::logic_error("inner loop violated the model error budget");
        }
        if (eo_k_xk1 > r_k + slack) {
            throw std::logic_error("inner loop violated the forcing bound");
        }

        const double tau_next = next_tolerance(ledger, cauchy.psi_at_xk, cauchy.psi_at_xC,
                                               psi_k_xk1, eo_k_xk1, k);

        rec.psi_k_at_xk = cauchy.psi_at_xk;
        rec.psi_k_at_xC = cauchy.psi_at_xC;
        rec.psi_k_at_xk1 = psi_k_xk1;
        rec.e_k_at_xC = cauchy.e_at_xC;
        rec.e_k_at_xk1 = e_k_xk1;
        rec.tau_next = tau_next;

        result.state.x = x_next;
        result.state.k = k + 1;
        tau = tau_next;

        try {
            model = build_with_gates(provider, result.state.x, tau, rho_k, lambda, ledger,
                                     config.max_refinements, &build_refines);
        } catch (const RefinementBudgetExhausted&) {
            rec.evals = problem.counter().snapshot();
            result.outer_records.push_back(rec);
            result.status = SolveStatus::RefinementBudgetExhausted;
            break;
        } catch (const CannotMeetTolerance&) {
            rec.evals = problem.counter().snapshot();
            result.outer_records.push_back(rec);
            result.status = SolveStatus::RefinementBudgetExhausted;
            break;
        }

        rec.e_k1_at_xk1 = merit_error(*model, result.state.x, rho_k);
        rec.psi_k1_at_xk1 = model_merit(*model, result.state.x, rho_k);
        if (rec.e_k1_at_xk1 > tau_next * (1.0 + 1e-9)) {
            throw std::logic_error("new model violates its build tolerance");
        }

        rec.evals = problem.counter().snapshot();
        result.outer_records.push_back(rec);
    }

    result.state.lambda = lambda;
    result.state.eval_counts = problem.counter().snapshot();
    result.final_model = model;
    return result;
}

}  // namespace tasqp
