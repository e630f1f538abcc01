#pragma once

#include "tasqp/model.hpp"

namespace tasqp::providers {

/// Degenerate provider: the models are the true functions and the error
/// functions vanish identically. Build and refine are no-ops.
class ExactWrapperProvider : public ModelProvider {
public:
    explicit ExactWrapperProvider(const ProblemFunctions& problem) : problem_(problem) {}

    ModelPtr build(const Vector& x, double tau, double rho, const Vector& lambda) override;
    ModelPtr refine(const TunableModel& model, const Vector& at, double tau, double rho,
                    const Vector& lambda) override;
    const ProblemFunctions& truth() const override { return problem_; }

private:
    const ProblemFunctions& problem_;
};

/// Error-injected provider with exactly computable error functions:
///   m_l(x) = f(x) + eps_l * pf(x - x_build),
///   h_l(x) = c(x) + eps_l * pc(x - x_build),
/// with smooth bounded perturbations pf, pc and eps_l = eps0 * decay^l.
/// e^f and e^c are |m - f| and ||h - c||_1 exactly, so the error-bound
/// inequality is tight with constant one. The refinement level is the
/// smallest one meeting the requested tolerance and the relative-error
/// gates.
class SyntheticProvider : public ModelProvider {
public:
    SyntheticProvider(const ProblemFunctions& problem, double decay,
                      const ToleranceLedger& ledger, double eps0 = 0.1);

    ModelPtr build(const Vector& x, double tau, double rho, const Vector& lambda) override;
    ModelPtr refine(const TunableModel& model, const Vector& at, double tau, double rho,
                    const Vector& lambda) override;
    const ProblemFunctions& truth() const override { return problem_; }

private:
    ModelPtr select_level(const Vector& x, double tau, double rho, const Vector& lambda,
                          int level_floor) const;

    const ProblemFunctions& problem_;
    double decay_;
    double eps0_;
    ToleranceLedger ledger_;  // only the gate thresholds are consulted
};

}  // namespace tasqp::providers
