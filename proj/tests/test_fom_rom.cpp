#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "tasqp/providers/rom.hpp"
#include "test_util.hpp"

using namespace tasqp;
using namespace tasqp::providers;

namespace {

Vector bump_controls(int nu, double scale) {
    Vector u(nu);
    for (int i = 0; i < nu; ++i) u(i) = scale * ((i % 3 == 0) ? 1.0 : -0.4);
    return u;
}

}  // namespace

TEST_CASE("bump basis pair vanishes at support endpoints") {
    CHECK(bump_h1(-1.0) == 0.0);
    CHECK(bump_h1(1.0) == 0.0);
    CHECK(bump_h1(0.0) == doctest::Approx(1.0));
    CHECK(bump_h2(-1.0) == 0.0);
    CHECK(bump_h2(1.0) == 0.0);
    CHECK(bump_h2(0.0) == doctest::Approx(0.0));
    CHECK(bump_h2(0.5) > 0.0);
}

TEST_CASE("state solver reaches tight residuals") {
    Fom1D fom;
    testutil::Rng rng(3);
    for (int rep = 0; rep < 5; ++rep) {
        const Vector u = rng.vector(fom.dimension(), -1.0, 1.0);
        const Vector y = fom.solve_state(u);
        CHECK(fom.residual(y, u).norm() <= 1e-12);
    }
}

TEST_CASE("adjoint gradients are consistent with finite differences") {
    Fom1D fom;
    testutil::Rng rng(7);
    const Vector u = rng.vector(fom.dimension(), -0.5, 0.5);
    const Vector grad = fom.objective_gradient(u);
    const Matrix jac = fom.constraint_jacobian(u);
    const double t = 1e-6;
    for (int j = 0; j < fom.dimension(); ++j) {
        const Vector e = Vector::Unit(fom.dimension(), j);
        const double fd_f = (fom.objective(u + t * e) - fom.objective(u - t * e)) / (2.0 * t);
        CHECK(std::abs(grad(j) - fd_f) <= 1e-5 * (1.0 + std::abs(fd_f)));
        const double fd_c =
            (fom.constraints(u + t * e)(0) - fom.constraints(u - t * e)(0)) / (2.0 * t);
        CHECK(std::abs(jac(0, j) - fd_c) <= 1e-5 * (1.0 + std::abs(fd_c)));
    }
}

TEST_CASE("sensitivities solve the linearized state equation") {
    Fom1D fom;
    const Vector u = bump_controls(fom.dimension(), 0.4);
    const Vector y = fom.solve_state(u);
    const Matrix sens = fom.solve_sensitivities(u);
    const Matrix J = fom.state_jacobian(y);
    CHECK((J * sens + fom.residual_control_jacobian()).norm() <= 1e-10);
}

TEST_CASE("Gauss-Newton operator is symmetric positive definite") {
    Fom1D fom;
    testutil::Rng rng(11);
    const Vector u = rng.vector(fom.dimension(), -0.5, 0.5);
    Vector lam(1);
    lam << -0.4;
    auto op = fom.hessian_operator(u, lam);
    for (int rep = 0; rep < 10; ++rep) {
        const Vector a = rng.vector(fom.dimension(), -1.0, 1.0);
        const Vector b = rng.vector(fom.dimension(), -1.0, 1.0);
        CHECK(std::abs(a.dot(op(b)) - b.dot(op(a))) <= 1e-12);
        CHECK(a.dot(op(a)) > 0.0);
    }
}

TEST_CASE("evaluation caching counts each solve once") {
    Fom1D fom;
    const Vector u = bump_controls(fom.dimension(), 0.2);
    (void)fom.objective(u);
    (void)fom.constraints(u);
    (void)fom.objective(u);
    const auto counts = fom.counter().snapshot();
    CHECK(counts.fom_state == 1);
    (void)fom.objective_gradient(u);
    (void)fom.objective_gradient(u);
    CHECK(fom.counter().snapshot().fom_adjoint == 1);
}

TEST_CASE("rom is exact at the build point") {
    Fom1D fom;
    RomProvider provider(fom);
    const Vector u0 = Vector::Zero(fom.dimension());
    auto model = provider.build(u0, 1e-2, 1.0, Vector(0));

    CHECK(model->objective_error(u0) <= 1e-10);
    CHECK(model->constraint_error(u0) <= 1e-10);
    CHECK(std::abs(model->objective(u0) - fom.objective(u0)) <= 1e-12);
    CHECK((model->objective_gradient(u0) - fom.objective_gradient(u0)).norm() <= 1e-12);
    CHECK((model->constraint_jacobian(u0) - fom.constraint_jacobian(u0)).norm() <= 1e-12);

    auto* rom = dynamic_cast<RomModel*>(model.get());
    REQUIRE(rom != nullptr);
    const Matrix gram = rom->basis().transpose() * rom->basis();
    CHECK((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("full basis reproduces the FOM at random controls") {
    Fom1D::Options opts;
    opts.grid_size = 40;  // full basis is affordable at this size
    Fom1D fom(opts);
    const Vector u0 = Vector::Zero(fom.dimension());
    RomModel full(fom, Matrix::Identity(40, 40), u0, 0, 1.0, 1.0);

    testutil::Rng rng(19);
    for (int rep = 0; rep < 5; ++rep) {
        const Vector u = rng.vector(fom.dimension(), -0.8, 0.8);
        CHECK(std::abs(full.objective(u) - fom.objective(u)) <= 1e-10);
        CHECK(std::abs(full.constraints(u)(0) - fom.constraints(u)(0)) <= 1e-10);
    }
}

TEST_CASE("error indicator never decreases under basis truncation") {
    Fom1D fom;
    RomProvider provider(fom);
    const Vector u0 = Vector::Zero(fom.dimension());
    auto base = provider.build(u0, 1e-2, 1.0, Vector(0));
    auto* rom = dynamic_cast<RomModel*>(base.get());
    REQUIRE(rom != nullptr);
    const Matrix& V = rom->basis();

    const Vector probe = bump_controls(fom.dimension(), 0.5);
    double prev = rom->residual_indicator(probe);
    for (Eigen::Index r = V.cols() - 1; r >= std::max<Eigen::Index>(2, V.cols() - 4); --r) {
        RomModel truncated(fom, V.leftCols(r), u0, 0, 1.0, 1.0);
        const double ind = truncated.residual_indicator(probe);
        CHECK(ind >= prev - 1e-12);
        prev = ind;
    }
}

TEST_CASE("refinement adds information at the requested point") {
    Fom1D fom;
    RomProvider provider(fom);
    const Vector u0 = Vector::Zero(fom.dimension());
    auto model = provider.build(u0, 1e-2, 1.0, Vector(0));

    const Vector at = bump_controls(fom.dimension(), 0.6);
    const double before = model->objective_error(at);
    auto refined = provider.refine(*model, at, 1e-2, 1.0, Vector(0));
    CHECK(refined->refinement_level() == 1);
    CHECK(refined->objective_error(at) <= 1e-10);  // state at `at` now spanned
    CHECK(before > refined->objective_error(at));

    // A second refinement at the same point cannot add information.
    CHECK_THROWS_AS(provider.refine(*refined, at, 1e-2, 1.0, Vector(0)), CannotMeetTolerance);
}

TEST_CASE("rom derivatives match finite differences near the build point") {
    Fom1D fom;
    RomProvider provider(fom);
    const Vector u0 = Vector::Zero(fom.dimension());
    auto model = provider.build(u0, 1e-2, 1.0, Vector(0));

    testutil::Rng rng(23);
    const double t = 1e-6;
    for (int rep = 0; rep < 10; ++rep) {
        const Vector u = u0 + rng.vector(fom.dimension(), -0.2, 0.2);
        const Vector grad = model->objective_gradient(u);
        const Matrix jac = model->constraint_jacobian(u);
        for (int j = 0; j < fom.dimension(); ++j) {
            const Vector e = Vector::Unit(fom.dimension(), j);
            const double fd_g =
                (model->objective(u + t * e) - model->objective(u - t * e)) / (2.0 * t);
            CHECK(std::abs(grad(j) - fd_g) <= 1e-5 * (1.0 + std::abs(fd_g)));
            const double fd_c = (model->constraints(u + t * e)(0) -
                                 model->constraints(u - t * e)(0)) /
                                (2.0 * t);
            CHECK(std::abs(jac(0, j) - fd_c) <= 1e-5 * (1.0 + std::abs(fd_c)));
        }
    }
}

TEST_CASE("rom provider rejects nonpositive tolerances") {
    Fom1D fom;
    RomProvider provider(fom);
    CHECK_THROWS_AS(provider.build(Vector::Zero(fom.dimension()), 0.0, 1.0, Vector(0)),
                    CannotMeetTolerance);
}

TEST_CASE("snapshot registry round-trips through the text format") {
    Fom1D fom;
    RomProvider provider(fom);
    const Vector u0 = Vector::Zero(fom.dimension());
    (void)provider.build(u0, 1e-2, 1.0, Vector(0));

    const std::string path = "snapshots_roundtrip.txt";
    provider.registry().save(path);
    SnapshotRegistry loaded = SnapshotRegistry::load(path);

    REQUIRE(loaded.states().size() == provider.registry().states().size());
    REQUIRE(loaded.adjoints().size() == provider.registry().adjoints().size());
    REQUIRE(loaded.sensitivities().size() == provider.registry().sensitivities().size());
    for (size_t i = 0; i < loaded.states().size(); ++i) {
        CHECK((loaded.states()[i] - provider.registry().states()[i]).norm() == 0.0);
    }
    for (size_t i = 0; i < loaded.sensitivities().size(); ++i) {
        CHECK((loaded.sensitivities()[i] - provider.registry().sensitivities()[i]).norm() == 0.0);
    }
    std::remove(path.c_str());
}

TEST_CASE("registry rejects malformed snapshot files") {
    const std::string path = "snapshots_bad.txt";
    {
        std::ofstream out(path);
        out << "# tasqp-snapshots v1\n";
        out << "starto 1.0 2.0\n";
    }
    CHECK_THROWS_AS(SnapshotRegistry::load(path), ParseError);
    std::remove(path.c_str());
}
