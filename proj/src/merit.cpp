#include "tasqp/merit.hpp"

#include <cmath>
#include <stdexcept>

namespace tasqp::merit {

void LineSearchParams::validate() const {
    if (!(c1 > 0.0 && c1 < 1.0)) throw std::invalid_argument("c1 must be in (0,1)");
    if (!(beta1 > 0.0 && beta1 <= beta2 && beta2 < 1.0))
        throw std::invalid_argument("need 0 < beta1 <= beta2 < 1");
    if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw std::invalid_argument("alpha0 must be in (0,1]");
    if (max_backtracks < 1) throw std::invalid_argument("max_backtracks must be positive");
}

double merit_value(double f_val, const Vector& c_val, double rho) {
    return f_val + rho * c_val.lpNorm<1>();
}

double merit_directional_derivative(const Vector& grad_f, const Vector& s, const Vector& c_val,
                                    double rho) {
    return grad_f.dot(s) - rho * c_val.lpNorm<1>();
}

PenaltyState update_penalty(const PenaltyState& state, double lambda_inf) {
    PenaltyState next = state;
    if (state.rho < lambda_inf + state.sigma) {
        next.rho = 2.0 * lambda_inf + state.sigma;
    }
    next.history.push_back(next.rho);
    return next;
}

LineSearchResult backtracking_search(const std::function<double(double)>& phi, double phi0,
                                     double D0, const LineSearchParams& params,
                                     const std::function<bool(double)>& predicate) {
    params.validate();
    // Any factor in [beta1, beta2] is admissible; the midpoint keeps the
    // search deterministic for every bracket choice.
    const double contraction = 0.5 * (params.beta1 + params.beta2);

    double alpha = params.alpha0;
    int n_evals = 0;
    for (int trial = 0; trial < params.max_backtracks; ++trial) {
        const double value = phi(alpha);
        ++n_evals;
        const bool sufficient = value <= phi0 + params.c1 * alpha * D0;
        if (sufficient && (!predicate || predicate(alpha))) {
            return {alpha, value, n_evals};
        }
        alpha *= contraction;
    }
    throw LineSearchFailure("backtracking exhausted its trial budget", params.max_backtracks);
}

}  // namespace tasqp::merit
