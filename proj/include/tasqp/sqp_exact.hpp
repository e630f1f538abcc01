#pragma once

#include <optional>
#include <vector>

#include "tasqp/linalg.hpp"
#include "tasqp/merit.hpp"
#include "tasqp/problem.hpp"

namespace tasqp {

enum class HessianStrategy { Identity, DampedBfgs, ProblemSupplied };

enum class SolveStatus {
    Converged,
    MaxIter,
    LineSearchFailure,
    RankDeficient,
    RefinementBudgetExhausted,
};

const char* to_string(SolveStatus status);
const char* to_string(HessianStrategy strategy);

/// Dense damped BFGS approximation; Powell damping keeps it positive
/// definite. Starts (and falls back) at the identity.
class BfgsHessian {
public:
    explicit BfgsHessian(int n) : H_(Matrix::Identity(n, n)) {}

    void update(const Vector& s, const Vector& y);
    LinearOperator op() const {
        return [this](const Vector& v) { return Vector(H_ * v); };
    }
    const Matrix& matrix() const { return H_; }

private:
    Matrix H_;
};

struct SolverConfig {
    double tol_f = 1e-6;
    double tol_c = 1e-6;
    int max_iter = 100;
    double rho0 = 1.0;
    double sigma = 0.1;
    merit::LineSearchParams line_search;
    HessianStrategy hessian_strategy = HessianStrategy::Identity;
    linalg::CgOptions cg;
    bool kkt_via_dense_oracle = false;  ///< step via dense factorization (oracle path)
    std::optional<Vector> lambda0;      ///< initial multiplier; least-squares estimate if absent
};

struct IterateState {
    Vector x;
    Vector lambda;
    merit::PenaltyState rho;
    int k = 0;
    EvalCounts eval_counts;
};

/// One outer-iteration history row.
struct IterationRecord {
    int k = 0;
    double stationarity = 0.0;  ///< ||grad f - J' lambda||_2
    double feasibility = 0.0;   ///< ||c||_1
    double merit = 0.0;
    double rho = 0.0;
    double alpha = 0.0;
    double step_norm = 0.0;
    int cg_iterations = 0;
    EvalCounts evals;
};

struct ExactResult {
    IterateState state;
    std::vector<IterationRecord> records;
    SolveStatus status = SolveStatus::MaxIter;
};

/// Least-squares multiplier (J J^T)^{-1} J grad_f.
Vector initial_multiplier(const Vector& grad_f, const Matrix& J);

/// Operator for the chosen Hessian strategy at (x, lambda). A positive
/// levenberg_shift adds shift * I on top of a problem-supplied operator;
/// unavailable problem Hessians fall back to the identity.
LinearOperator hessian_apply(HessianStrategy strategy, const ProblemFunctions& problem,
                             const Vector& x, const Vector& lambda,
                             const BfgsHessian* bfgs = nullptr, double levenberg_shift = 0.0);

/// Step solve with curvature safeguarding: on detection of nonpositive
/// curvature the shift is raised until sampled Rayleigh quotients stay
/// above h_l = 1e-8, with the truncated-CG step as last resort.
linalg::KktSolution solve_step_safeguarded(
    const std::function<LinearOperator(double shift)>& make_op, const Matrix& J, const Vector& g,
    const Vector& c, const linalg::CgOptions& cg, double* shift_io);

/// Line-search SQP with l1 merit on exact function information.
ExactResult solve_exact(const ProblemFunctions& problem, const Vector& x0,
                        const SolverConfig& config);

}  // namespace tasqp
