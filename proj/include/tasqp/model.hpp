#pragma once

#include <memory>

#include "tasqp/errors.hpp"
#include "tasqp/problem.hpp"
#include "tasqp/types.hpp"

namespace tasqp {

/// One tunable-accuracy model pair (m_k, h_k) with computable error
/// functions e^f, e^c. Error functions are nonnegative and may return
/// +inf away from the build point. Evaluations are deterministic for a
/// fixed refinement level.
class TunableModel {
public:
    virtual ~TunableModel() = default;

    virtual int dimension() const = 0;
    virtual int constraint_count() const = 0;

    virtual double objective(const Vector& x) const = 0;          // m_k
    virtual Vector constraints(const Vector& x) const = 0;        // h_k
    virtual Vector objective_gradient(const Vector& x) const = 0; // grad m_k
    virtual Matrix constraint_jacobian(const Vector& x) const = 0;// h_k'

    virtual double objective_error(const Vector& x) const = 0;    // e_k^f
    virtual double constraint_error(const Vector& x) const = 0;   // e_k^c

    virtual const Vector& build_point() const = 0;
    virtual int refinement_level() const = 0;

    /// Operator replacing the model Lagrangian Hessian, when the model
    /// can supply one.
    virtual bool has_hessian() const { return false; }
    virtual LinearOperator hessian_operator(const Vector& /*x*/, const Vector& /*lambda*/) const {
        return [](const Vector& v) { return v; };
    }

    /// Reduced dimension for projection-based models; 0 otherwise.
    virtual int reduced_dimension() const { return 0; }
};

using ModelPtr = std::shared_ptr<TunableModel>;

/// Builds and refines TunableModels. `tau` caps the merit error
/// e(x; rho) = e^f(x) + rho e^c(x) at the build point. `lambda` is the
/// most recent multiplier estimate, used by providers that pre-screen the
/// relative-error gates; a 0-size vector means none is available yet.
class ModelProvider {
public:
    virtual ~ModelProvider() = default;

    virtual ModelPtr build(const Vector& x, double tau, double rho, const Vector& lambda) = 0;

    /// Refine by incorporating information at `at`; the result must still
    /// satisfy the build-point tolerance at the model's build point.
    virtual ModelPtr refine(const TunableModel& model, const Vector& at, double tau, double rho,
                            const Vector& lambda) = 0;

    /// The true problem behind the models (relative-error gates evaluate
    /// exact quantities at the build point through it).
    virtual const ProblemFunctions& truth() const = 0;
};

/// Parameters linking consecutive outer iterations of the model driver:
/// omega-power surrogate, acceptance fractions, forcing sequence, the
/// live model tolerance, and relative-error thresholds.
struct ToleranceLedger {
    double omega = 0.9;  ///< in (0,1)
    double a1 = 0.5;     ///< in (0,1)
    double a2 = 1.0;     ///< in (0,1]
    double r0 = 1.0;     ///< forcing sequence scale
    double gamma = 0.5;  ///< forcing sequence ratio, in (0,1)
    double tau_current = 1e-2;  ///< tau_k, positive whenever a build is requested
    double tau_fg = 0.5;  ///< relative gradient threshold
    double tau_cg = 0.5;  ///< relative Jacobian threshold
    double tau_c = 0.5;   ///< relative constraint threshold
};

struct RelErrorCheck {
    bool pass = false;
    double ratio_fg = 0.0;
    double ratio_cg = 0.0;
    double ratio_c = 0.0;
};

/// e_k(x; rho) = e_k^f(x) + rho * e_k^c(x); +inf propagates.
double merit_error(const TunableModel& model, const Vector& x, double rho);

/// e^omega, the surrogate for the unknown-constant error bound.
double omega_bound(double e_val, double omega);

/// Relative error gates at x: gradient and Jacobian errors against the
/// model stationarity residual, constraint error against ||h||_1. This is
/// the single place the true problem is evaluated per model build.
/// Denominators below 1e-14 pass only with numerators below 1e-14.
RelErrorCheck check_relative_errors(const TunableModel& model, const ProblemFunctions& problem,
                                    const Vector& x, const Vector& lambda,
                                    const ToleranceLedger& ledger);

/// Forcing value r_k = r0 * gamma^k.
double forcing_value(const ToleranceLedger& ledger, int k);

/// Cauchy point acceptability: e(x_C; rho)^omega <= min{r_k, a2(1-a1) * psi_decrease}.
bool cauchy_acceptable(const ToleranceLedger& ledger, double e_at_xC_pow_omega, double r_k,
                       double psi_decrease);

/// Tolerance seeding the next model build:
///   tau_{k+1} = min{ r_k, -e_k(x_{k+1})^omega - psi_k(x_{k+1}) + psi_k(x_C)
///                        + (1 - a1) (psi_k(x_k) - psi_k(x_C)) }.
/// Throws InfeasibleTolerance when the result is nonpositive (cannot
/// happen once the driver enforced the inner-loop conditions).
double next_tolerance(const ToleranceLedger& ledger, double psi_at_xk, double psi_at_xC,
                      double psi_at_xk1, double e_at_xk1_pow_omega, int k);

}  // namespace tasqp
