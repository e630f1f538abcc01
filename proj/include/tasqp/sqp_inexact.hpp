#pragma once

#include <limits>
#include <vector>

#include "tasqp/model.hpp"
#include "tasqp/sqp_exact.hpp"

namespace tasqp {

/// Generalized Cauchy point: one model-SQP step with sufficient decrease
/// whose error budget satisfies the Cauchy acceptance condition.
struct CauchyResult {
    Vector x_C;
    Vector s0;
    double alpha0 = 0.0;
    Vector lambda_next;        ///< lambda_{k+1,0}
    merit::PenaltyState rho;   ///< penalty after the update rule
    int refinements_used = 0;
    int cg_iterations = 0;

    double psi_at_xk = 0.0;  ///< psi_k(x_k; rho_k)
    double psi_at_xC = 0.0;  ///< psi_k(x_C; rho_k)
    double e_at_xC = 0.0;    ///< e_k(x_C; rho_k)
    double r_k = 0.0;
};

enum class SubminExit { ModelStationary, PenaltyRaised, ConstraintBound, MaxInner };
const char* to_string(SubminExit exit);

struct InnerRecord {
    int j = 0;
    double stationarity = 0.0;  ///< model FONC residual
    double feasibility = 0.0;   ///< ||h||_1
    double psi = 0.0;           ///< psi_k(x_{k,j}; rho_{k,j})
    double rho = 0.0;           ///< rho_{k,j}
    double alpha = 0.0;
};

struct SubminResult {
    Vector x_next;
    std::vector<InnerRecord> inner_records;
    SubminExit exit = SubminExit::MaxInner;
    Vector lambda_last;
};

struct InexactConfig {
    SolverConfig base;
    int max_refinements = 10;  ///< per outer iteration (and per model build)
    int extra_backsteps = 5;   ///< step-size halvings tried before each refinement
    int max_inner = 50;
    bool instrument_truth = true;  ///< record true-side FONC residuals per iteration
};

/// History row for one outer iteration, including the merit/error payload
/// needed to verify the decrease conditions after the run.
struct OuterRecord {
    static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

    int k = 0;
    double model_stationarity = 0.0;
    double model_feasibility = 0.0;
    double true_stationarity = kUnset;
    double true_feasibility = kUnset;
    double merit = 0.0;  ///< psi_k(x_k) at the penalty in effect when recorded
    double rho = 0.0;
    double alpha = 0.0;  ///< Cauchy step size
    double tau_k = 0.0;
    double r_k = kUnset;
    int refinements_used = 0;
    int inner_iterations = 0;
    int basis_size = 0;
    EvalCounts evals;

    // Decrease-condition payload; populated for every non-final record.
    double psi_k_at_xk = kUnset;
    double psi_k_at_xC = kUnset;
    double psi_k_at_xk1 = kUnset;
    double e_k_at_xC = kUnset;
    double e_k_at_xk1 = kUnset;
    double tau_next = kUnset;
    double e_k1_at_xk1 = kUnset;    ///< new model error at x_{k+1}, penalty rho_k
    double psi_k1_at_xk1 = kUnset;  ///< new model merit at x_{k+1}, penalty rho_k
};

struct InexactResult {
    IterateState state;
    std::vector<OuterRecord> outer_records;
    std::vector<std::vector<InnerRecord>> inner_histories;
    SolveStatus status = SolveStatus::MaxIter;
    ModelPtr final_model;
};

/// Build or refine models at x_k until a Cauchy point passes the error
/// acceptance condition; refinement incorporates information at the
/// rejected Cauchy candidate. Throws RefinementBudgetExhausted when the
/// per-iteration budget is spent.
CauchyResult compute_cauchy_point(ModelProvider& provider, ModelPtr& model,
                                  const ToleranceLedger& ledger, double tau_k, double r_k,
                                  const Vector& x_k, const Vector& lambda_k,
                                  const merit::PenaltyState& rho_state,
                                  const InexactConfig& config);

/// Model-only SQP started at the Cauchy point; the model stays fixed.
/// Every accepted step keeps the error budget constraint and the merit
/// value at the outer penalty below the Cauchy value.
SubminResult solve_submin(const TunableModel& model, const ToleranceLedger& ledger,
                          const CauchyResult& cauchy, const InexactConfig& config);

/// Outer driver on tunable models (stopping tests use model quantities).
InexactResult solve_inexact(ModelProvider& provider, const ProblemFunctions& problem,
                            const Vector& x0, const ToleranceLedger& ledger,
                            const InexactConfig& config);

}  // namespace tasqp
