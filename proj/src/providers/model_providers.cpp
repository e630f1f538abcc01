#include "tasqp/providers/model_providers.hpp"

#include <cmath>
#include <vector>

#include "tasqp/errors.hpp"
#include "tasqp/sqp_exact.hpp"

namespace tasqp::providers {

namespace {

class ExactWrapperModel : public TunableModel {
public:
    ExactWrapperModel(const ProblemFunctions& p, Vector build_point, int level)
        : p_(p), build_point_(std::move(build_point)), level_(level) {}

    int dimension() const override { return p_.dimension(); }
    int constraint_count() const override { return p_.constraint_count(); }
    double objective(const Vector& x) const override { return p_.objective(x); }
    Vector constraints(const Vector& x) const override { return p_.constraints(x); }
    Vector objective_gradient(const Vector& x) const override {
        return p_.objective_gradient(x);
    }
    Matrix constraint_jacobian(const Vector& x) const override {
        return p_.constraint_jacobian(x);
    }
    double objective_error(const Vector&) const override { return 0.0; }
    double constraint_error(const Vector&) const override { return 0.0; }
    const Vector& build_point() const override { return build_point_; }
    int refinement_level() const override { return level_; }
    bool has_hessian() const override { return p_.has_hessian(); }
    LinearOperator hessian_operator(const Vector& x, const Vector& lambda) const override {
        return p_.hessian_operator(x, lambda);
    }

private:
    const ProblemFunctions& p_;
    Vector build_point_;
    int level_;
};

/// Fixed smooth perturbation directions; any deterministic O(1) choice
/// works, these keep the injected error nonzero at the build point.
Vector perturbation_direction(int n, int seed) {
    Vector u(n);
    for (int j = 0; j < n; ++j) u(j) = std::sin(1.0 + 0.7 * (seed + 1) * (j + 2));
    return u;
}

class SyntheticModel : public TunableModel {
public:
    SyntheticModel(const ProblemFunctions& p, Vector build_point, double eps, int level)
        : p_(p), build_point_(std::move(build_point)), eps_(eps), level_(level) {
        const int n = p_.dimension();
        const int m = p_.constraint_count();
        u_f_ = perturbation_direction(n, 0);
        w_.resize(m);
        for (int i = 0; i < m; ++i) w_[i] = perturbation_direction(n, i + 1);
    }

    int dimension() const override { return p_.dimension(); }
    int constraint_count() const override { return p_.constraint_count(); }

    double objective(const Vector& x) const override {
        return p_.objective(x) + eps_ * pf(x);
    }
    Vector constraints(const Vector& x) const override {
        Vector h = p_.constraints(x);
        for (int i = 0; i < h.size(); ++i) h(i) += eps_ * pc(x, i);
        return h;
    }
    Vector objective_gradient(const Vector& x) const override {
        const double arg = u_f_.dot(x - build_point_) + 0.7;
        return p_.objective_gradient(x) + eps_ * std::cos(arg) * u_f_;
    }
    Matrix constraint_jacobian(const Vector& x) const override {
        Matrix J = p_.constraint_jacobian(x);
        for (int i = 0; i < J.rows(); ++i) {
            const double arg = w_[i].dot(x - build_point_) + 0.3 * (i + 1);
            J.row(i) += eps_ * std::cos(arg) * w_[i].transpose();
        }
        return J;
    }

    double objective_error(const Vector& x) const override { return eps_ * std::abs(pf(x)); }
    double constraint_error(const Vector& x) const override {
        double total = 0.0;
        for (int i = 0; i < p_.constraint_count(); ++i) total += std::abs(pc(x, i));
        return eps_ * total;
    }

    const Vector& build_point() const override { return build_point_; }
    int refinement_level() const override { return level_; }

    bool has_hessian() const override { return p_.has_hessian(); }
    LinearOperator hessian_operator(const Vector& x, const Vector& lambda) const override {
        LinearOperator base = p_.hessian_operator(x, lambda);
        const double sf = -eps_ * std::sin(u_f_.dot(x - build_point_) + 0.7);
        Vector lam_terms = Vector::Zero(lambda.size());
        std::vector<double> sc(w_.size());
        for (size_t i = 0; i < w_.size(); ++i) {
            sc[i] = -eps_ * std::sin(w_[i].dot(x - build_point_) + 0.3 * (i + 1));
        }
        const Vector u = u_f_;
        const std::vector<Vector> w = w_;
        const Vector lam = lambda;
        return [base, sf, sc, u, w, lam](const Vector& v) {
            Vector out = base(v) + sf * u.dot(v) * u;
            for (size_t i = 0; i < w.size(); ++i) {
                const double li = (static_cast<Eigen::Index>(i) < lam.size()) ? lam(i) : 0.0;
                out -= li * sc[i] * w[i].dot(v) * w[i];
            }
            return out;
        };
    }

    double eps() const { return eps_; }

private:
    double pf(const Vector& x) const { return std::sin(u_f_.dot(x - build_point_) + 0.7); }
    double pc(const Vector& x, int i) const {
        return std::sin(w_[i].dot(x - build_point_) + 0.3 * (i + 1));
    }

    const ProblemFunctions& p_;
    Vector build_point_;
    double eps_;
    int level_;
    Vector u_f_;
    std::vector<Vector> w_;
};

}  // namespace

ModelPtr ExactWrapperProvider::build(const Vector& x, double tau, double rho,
                                     const Vector& lambda) {
    (void)tau;
    (void)rho;
    (void)lambda;
    return std::make_shared<ExactWrapperModel>(problem_, x, 0);
}

ModelPtr ExactWrapperProvider::refine(const TunableModel& model, const Vector& at, double tau,
                                      double rho, const Vector& lambda) {
    (void)at;
    (void)tau;
    (void)rho;
    (void)lambda;
    return std::make_shared<ExactWrapperModel>(problem_, model.build_point(),
                                               model.refinement_level() + 1);
}

SyntheticProvider::SyntheticProvider(const ProblemFunctions& problem, double decay,
                                     const ToleranceLedger& ledger, double eps0)
    : problem_(problem), decay_(decay), eps0_(eps0), ledger_(ledger) {
    if (!(decay > 0.0 && decay < 1.0)) {
        throw std::invalid_argument("synthetic decay must be in (0,1)");
    }
}

ModelPtr SyntheticProvider::select_level(const Vector& x, double tau, double rho,
                                         const Vector& lambda, int level_floor) const {
    if (!(tau > 0.0)) {
        throw CannotMeetTolerance("synthetic provider asked for nonpositive tolerance");
    }
    constexpr int kMaxLevel = 400;
    for (int level = level_floor; level <= kMaxLevel; ++level) {
        auto candidate = std::make_shared<SyntheticModel>(problem_, x,
                                                          eps0_ * std::pow(decay_, level), level);
        if (merit_error(*candidate, x, rho) > tau) continue;
        Vector lam = lambda;
        if (lam.size() == 0) {
            lam = initial_multiplier(candidate->objective_gradient(x),
                                     candidate->constraint_jacobian(x));
        }
        if (!check_relative_errors(*candidate, problem_, x, lam, ledger_).pass) continue;
        return candidate;
    }
    throw CannotMeetTolerance("synthetic provider exhausted refinement levels");
}

ModelPtr SyntheticProvider::build(const Vector& x, double tau, double rho, const Vector& lambda) {
    return select_level(x, tau, rho, lambda, 0);
}

ModelPtr SyntheticProvider::refine(const TunableModel& model, const Vector& at, double tau,
                                   double rho, const Vector& lambda) {
    (void)at;  // refinement tightens the level globally
    return select_level(model.build_point(), tau, rho, lambda, model.refinement_level() + 1);
}

}  // namespace tasqp::providers
