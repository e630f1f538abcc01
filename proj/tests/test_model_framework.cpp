#include <doctest.h>

#include <cmath>
#include <limits>

#include "tasqp/model.hpp"
#include "tasqp/providers/analytic.hpp"
#include "tasqp/providers/model_providers.hpp"
#include "test_util.hpp"

using namespace tasqp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector vec(std::initializer_list<double> values) {
    Vector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v(i++) = x;
    return v;
}

/// Hand-tunable model for the operation-level tests.
class StubModel : public TunableModel {
public:
    StubModel(int n, int m) : n_(n), m_(m), build_point_(Vector::Zero(n)) {}

    double ef = 0.0, ec = 0.0;
    Vector grad = Vector::Zero(2);
    Matrix jac = Matrix::Zero(1, 2);
    Vector h = Vector::Zero(1);

    int dimension() const override { return n_; }
    int constraint_count() const override { return m_; }
    double objective(const Vector&) const override { return 0.0; }
    Vector constraints(const Vector&) const override { return h; }
    Vector objective_gradient(const Vector&) const override { return grad; }
    Matrix constraint_jacobian(const Vector&) const override { return jac; }
    double objective_error(const Vector&) const override { return ef; }
    double constraint_error(const Vector&) const override { return ec; }
    const Vector& build_point() const override { return build_point_; }
    int refinement_level() const override { return 0; }

private:
    int n_, m_;
    Vector build_point_;
};

}  // namespace

TEST_CASE("merit_error combines the error functions") {
    StubModel model(2, 1);
    model.ef = 0.1;
    model.ec = 0.2;
    CHECK(merit_error(model, Vector::Zero(2), 3.0) == doctest::Approx(0.7));

    model.ef = 0.0;
    model.ec = 0.0;
    CHECK(merit_error(model, Vector::Zero(2), 5.0) == 0.0);

    model.ec = kInf;
    CHECK(merit_error(model, Vector::Zero(2), 1.0) == kInf);
}

TEST_CASE("omega_bound surrogate") {
    CHECK(omega_bound(0.01, 0.5) == doctest::Approx(0.1));
    CHECK(omega_bound(0.0, 0.9) == 0.0);
    CHECK(omega_bound(1.0, 0.3) == doctest::Approx(1.0));
    CHECK(omega_bound(1.0, 0.77) == doctest::Approx(1.0));

    // Monotonicity and domination of e for e <= 1.
    testutil::Rng rng(3);
    for (int rep = 0; rep < 100; ++rep) {
        const double omega = rng.uniform(0.05, 0.95);
        const double e1 = rng.uniform(0.0, 1.0);
        const double e2 = rng.uniform(0.0, 1.0);
        const double lo = std::min(e1, e2), hi = std::max(e1, e2);
        CHECK(omega_bound(lo, omega) <= omega_bound(hi, omega));
        CHECK(omega_bound(hi, omega) >= hi);
    }
}

TEST_CASE("relative error gates") {
    auto p1 = providers::make_p1();
    ToleranceLedger ledger;
    ledger.tau_fg = 0.1;
    ledger.tau_cg = 0.1;
    ledger.tau_c = 0.1;

    SUBCASE("exact wrapper passes with zero ratios") {
        providers::ExactWrapperProvider provider(*p1);
        auto model = provider.build(vec({0.5, 0.0}), 1.0, 1.0, Vector(0));
        const auto check =
            check_relative_errors(*model, *p1, vec({0.5, 0.0}), vec({0.3}), ledger);
        CHECK(check.pass);
        CHECK(check.ratio_fg == 0.0);
        CHECK(check.ratio_cg == 0.0);
        CHECK(check.ratio_c == 0.0);
    }

    SUBCASE("small gradient perturbation passes with the expected ratio") {
        class Shifted : public StubModel {
        public:
            using StubModel::StubModel;
            const ProblemFunctions* truth = nullptr;
            Vector shift;
            double objective(const Vector& x) const override { return truth->objective(x); }
            Vector constraints(const Vector& x) const override { return truth->constraints(x); }
            Vector objective_gradient(const Vector& x) const override {
                return truth->objective_gradient(x) + shift;
            }
            Matrix constraint_jacobian(const Vector& x) const override {
                return truth->constraint_jacobian(x);
            }
        };
        Shifted model(2, 1);
        model.truth = p1.get();
        model.shift = vec({0.05, 0.0});
        // At x = (2, 1), P1 has grad f = (2, 1), J = [1 1]; with lambda = 0
        // the denominator is ||grad m||.
        const Vector x = vec({2.0, 1.0});
        const auto check = check_relative_errors(model, *p1, x, vec({0.0}), ledger);
        const double denom = vec({2.05, 1.0}).norm();
        CHECK(check.ratio_fg == doctest::Approx(0.05 / denom));
        CHECK(check.pass);
    }

    SUBCASE("large gradient error fails the first gate") {
        class Wrong : public StubModel {
        public:
            using StubModel::StubModel;
            const ProblemFunctions* truth = nullptr;
            double objective(const Vector& x) const override { return truth->objective(x); }
            Vector constraints(const Vector& x) const override { return truth->constraints(x); }
            Vector objective_gradient(const Vector& x) const override {
                return truth->objective_gradient(x) + Vector(Vector::Ones(2));
            }
            Matrix constraint_jacobian(const Vector& x) const override {
                return truth->constraint_jacobian(x);
            }
        };
        Wrong model(2, 1);
        model.truth = p1.get();
        const auto check = check_relative_errors(model, *p1, vec({2.0, 1.0}), vec({0.0}), ledger);
        CHECK_FALSE(check.pass);
        CHECK(check.ratio_fg > ledger.tau_fg);
    }

    SUBCASE("near-stationary denominator needs a matching numerator") {
        providers::ExactWrapperProvider provider(*p1);
        auto model = provider.build(vec({1.0, 1.0}), 1.0, 1.0, Vector(0));
        const auto check =
            check_relative_errors(*model, *p1, vec({1.0, 1.0}), vec({1.0}), ledger);
        CHECK(check.pass);
    }
}

TEST_CASE("forcing sequence") {
    ToleranceLedger ledger;
    CHECK(forcing_value(ledger, 0) == doctest::Approx(1.0));
    CHECK(forcing_value(ledger, 3) == doctest::Approx(0.125));
    double prev = forcing_value(ledger, 0);
    for (int k = 1; k < 40; ++k) {
        const double r = forcing_value(ledger, k);
        CHECK(r < prev);
        CHECK(r > 0.0);
        prev = r;
    }
    CHECK(forcing_value(ledger, 60) < 1e-17);
}

TEST_CASE("cauchy_acceptable") {
    ToleranceLedger ledger;  // a1 = 0.5, a2 = 1.0
    CHECK(cauchy_acceptable(ledger, 0.05, 0.5, 1.0));
    CHECK(cauchy_acceptable(ledger, 0.0, 0.5, 0.0));
    CHECK_FALSE(cauchy_acceptable(ledger, 1e-9, 0.5, 0.0));
    CHECK_FALSE(cauchy_acceptable(ledger, 0.6, 0.5, 1e9));
}

TEST_CASE("next_tolerance") {
    ToleranceLedger ledger;  // a1 = 0.5, r0 = 1, gamma = 0.5

    SUBCASE("direct formula") {
        // r_1 = 0.5; slack = -0.1 - 1.0 + 1.2 + 0.5*(2.2 - 1.2) = 0.6.
        CHECK(next_tolerance(ledger, 2.2, 1.2, 1.0, 0.1, 1) == doctest::Approx(0.5));
    }
    SUBCASE("binding error budget still leaves room") {
        // x_{k+1} = x_C with e^omega at the budget equality; with a2 < 1
        // the remaining slack (1 - a2)(1 - a1) * decrease stays positive.
        ToleranceLedger tight = ledger;
        tight.a2 = 0.5;
        const double psi_xk = 2.0, psi_xC = 1.0;
        const double decrease = psi_xk - psi_xC;
        const double eo = tight.a2 * (1.0 - tight.a1) * decrease;
        const double tau = next_tolerance(tight, psi_xk, psi_xC, psi_xC, eo, 5);
        const double expected =
            std::min(forcing_value(tight, 5), -eo + (1.0 - tight.a1) * decrease);
        CHECK(tau == doctest::Approx(expected));
        CHECK(tau > 0.0);
    }
    SUBCASE("violation of the decrease condition is infeasible") {
        CHECK_THROWS_AS(next_tolerance(ledger, 2.0, 1.0, 1.9, 0.0, 0), InfeasibleTolerance);
    }
    SUBCASE("result never exceeds the forcing value") {
        testutil::Rng rng(9);
        for (int rep = 0; rep < 100; ++rep) {
            const int k = static_cast<int>(rng.uniform(0.0, 10.0));
            const double psi_xk = rng.uniform(1.0, 3.0);
            const double psi_xC = psi_xk - rng.uniform(0.1, 0.9);
            const double psi_x1 = psi_xC - rng.uniform(0.0, 0.5);
            const double eo = rng.uniform(0.0, 0.2 * (psi_xk - psi_xC));
            const double tau = next_tolerance(ledger, psi_xk, psi_xC, psi_x1, eo, k);
            CHECK(tau <= forcing_value(ledger, k));
            CHECK(tau > 0.0);
        }
    }
}

TEST_CASE("synthetic provider merit error bound is valid with constant one") {
    auto p2 = providers::make_p2();
    ToleranceLedger ledger;
    providers::SyntheticProvider provider(*p2, 0.5, ledger);
    const Vector x_build = vec({-1.5, -0.8});
    auto model = provider.build(x_build, 1e-2, 1.0, Vector(0));

    testutil::Rng rng(21);
    for (int rep = 0; rep < 100; ++rep) {
        Vector x = x_build + rng.vector(2, -1.0, 1.0);
        const double rho = rng.uniform(0.5, 3.0);
        const double phi = p2->objective(x) + rho * p2->constraints(x).lpNorm<1>();
        const double psi = model->objective(x) + rho * model->constraints(x).lpNorm<1>();
        CHECK(std::abs(phi - psi) <= merit_error(*model, x, rho) + 1e-14);
    }
}
