#pragma once

#include <functional>
#include <vector>

#include "tasqp/errors.hpp"
#include "tasqp/types.hpp"

namespace tasqp::merit {

/// Penalty parameter with its update history. The update rule only ever
/// keeps or raises rho, so the history is nondecreasing within a run.
struct PenaltyState {
    double rho = 1.0;
    double sigma = 0.1;
    std::vector<double> history;
};

struct LineSearchParams {
    double c1 = 1e-4;    ///< sufficient-decrease constant, in (0,1)
    double beta1 = 0.5;  ///< contraction bracket lower
    double beta2 = 0.5;  ///< contraction bracket upper
    double alpha0 = 1.0; ///< initial trial step, in [c3, 1] with c3 > 0
    int max_backtracks = 60;

    void validate() const;
};

struct LineSearchResult {
    double alpha = 0.0;
    double merit_at_alpha = 0.0;
    int n_evals = 0;
};

/// phi(x; rho) = f + rho * ||c||_1
double merit_value(double f_val, const Vector& c_val, double rho);

/// Directional derivative of the l1 merit along a direction with
/// c + J s = 0 (caller guarantees): grad_f' s - rho * ||c||_1.
double merit_directional_derivative(const Vector& grad_f, const Vector& s, const Vector& c_val,
                                    double rho);

/// Keep rho if rho >= |lambda|_inf + sigma, else reset to 2|lambda|_inf + sigma.
PenaltyState update_penalty(const PenaltyState& state, double lambda_inf);

/// Backtracking search for phi(alpha) <= phi0 + c1 * alpha * D0 with D0 < 0.
/// An optional per-trial predicate must also hold at the returned alpha
/// (used by the model drivers to enforce the error-budget constraint).
/// Throws LineSearchFailure after max_backtracks trials.
LineSearchResult backtracking_search(const std::function<double(double)>& phi, double phi0,
                                     double D0, const LineSearchParams& params,
                                     const std::function<bool(double)>& predicate = {});

}  // namespace tasqp::merit
