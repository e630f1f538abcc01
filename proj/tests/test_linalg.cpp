#include <doctest.h>

#include "tasqp/linalg.hpp"
#include "test_util.hpp"

using namespace tasqp;
using namespace tasqp::linalg;

namespace {

Matrix row(std::initializer_list<double> values) {
    Matrix J(1, static_cast<Eigen::Index>(values.size()));
    Eigen::Index j = 0;
    for (double v : values) J(0, j++) = v;
    return J;
}

Vector vec(std::initializer_list<double> values) {
    Vector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v(i++) = x;
    return v;
}

LinearOperator matrix_op(const Matrix& H) {
    return [H](const Vector& v) { return Vector(H * v); };
}

}  // namespace

TEST_CASE("min_norm_particular on hand examples") {
    CHECK((min_norm_particular(row({1.0, 1.0}), vec({-2.0})) - vec({1.0, 1.0})).norm() ==
          doctest::Approx(0.0).epsilon(1e-14));
    CHECK(min_norm_particular(row({1.0, 0.0}), vec({0.0})).norm() == doctest::Approx(0.0));

    // Two-row case, checked against the normal equations solved directly.
    Matrix J(2, 3);
    J << 1.0, 0.0, 1.0, 0.0, 1.0, 0.0;
    const Vector c = vec({1.0, 1.0});
    const Vector s = min_norm_particular(J, c);
    CHECK((s - vec({-0.5, -1.0, -0.5})).norm() == doctest::Approx(0.0).epsilon(1e-14));
    const Matrix gram = J * J.transpose();
    const Vector oracle = -J.transpose() * gram.ldlt().solve(c);
    CHECK((s - oracle).norm() < 1e-14);
}

TEST_CASE("min_norm_particular rejects rank-deficient rows") {
    Matrix J(2, 2);
    J << 1.0, 0.0, 2.0, 0.0;
    CHECK_THROWS_AS(min_norm_particular(J, vec({1.0, 2.0})), RankDeficientError);
}

TEST_CASE("nullspace projector on hand examples") {
    CHECK((apply_nullspace_projector(row({1.0, 1.0}), vec({1.0, 0.0})) - vec({0.5, -0.5}))
              .norm() < 1e-14);
    CHECK((apply_nullspace_projector(row({1.0, 0.0}), vec({3.0, 7.0})) - vec({0.0, 7.0}))
              .norm() < 1e-14);
}

TEST_CASE("projector annihilates the row space") {
    testutil::Rng rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        const int n = 2 + static_cast<int>(rng.uniform(0.0, 18.0));
        const int m = 1 + static_cast<int>(rng.uniform(0.0, std::min(4, n - 1)));
        const Matrix J = rng.full_rank(m, n);
        const Vector w = rng.vector(m);
        const Vector v = J.transpose() * w;  // element of range(J')
        CHECK(apply_nullspace_projector(J, v).norm() <= 1e-10 * (1.0 + v.norm()));
    }
}

TEST_CASE("projector idempotence and annihilation properties") {
    testutil::Rng rng(7);
    for (int rep = 0; rep < 100; ++rep) {
        const int n = 2 + static_cast<int>(rng.uniform(0.0, 18.0));
        const int m = 1 + static_cast<int>(rng.uniform(0.0, std::min(4, n - 1)));
        const Matrix J = rng.full_rank(m, n);
        const Vector v = rng.vector(n, -5.0, 5.0);
        const Vector Pv = apply_nullspace_projector(J, v);
        const Vector PPv = apply_nullspace_projector(J, Pv);
        CHECK((PPv - Pv).norm() <= 1e-12 * (1.0 + v.norm()));
        CHECK((J * Pv).norm() <= 1e-10 * J.norm() * (1.0 + v.norm()));
    }
}

TEST_CASE("solve_kkt_projected on hand examples") {
    SUBCASE("feasibility step only") {
        const auto sol = solve_kkt_projected(matrix_op(Matrix::Identity(2, 2)), row({1.0, 1.0}),
                                             vec({0.0, 0.0}), vec({-1.0}));
        CHECK((sol.step - vec({0.5, 0.5})).norm() < 1e-12);
        CHECK(sol.multiplier(0) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("pure nullspace descent") {
        const auto sol = solve_kkt_projected(matrix_op(Matrix::Identity(2, 2)), row({1.0, 0.0}),
                                             vec({0.0, 1.0}), vec({0.0}));
        CHECK((sol.step - vec({0.0, -1.0})).norm() < 1e-12);
        CHECK(sol.multiplier(0) == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("projected solve matches the dense oracle") {
    testutil::Rng rng(23);
    for (int rep = 0; rep < 120; ++rep) {
        const int n = 2 + static_cast<int>(rng.uniform(0.0, 18.0));
        const int m = 1 + static_cast<int>(rng.uniform(0.0, std::min(5, n - 1)));
        const Matrix H = rng.spd(n);
        const Matrix J = rng.full_rank(m, n);
        const Vector g = rng.vector(n, -2.0, 2.0);
        const Vector c = rng.vector(m, -2.0, 2.0);

        const auto projected = solve_kkt_projected(matrix_op(H), J, g, c);
        const auto oracle = dense_kkt_oracle(H, J, g, c);

        CHECK((projected.step - oracle.step).norm() <= 1e-8 * (1.0 + oracle.step.norm()));
        CHECK((projected.multiplier - oracle.multiplier).norm() <=
              1e-8 * (1.0 + oracle.multiplier.norm()));
        CHECK((c + J * projected.step).norm() <= 1e-8 * (1.0 + c.norm()));
    }
}

TEST_CASE("nonpositive curvature is flagged, not fatal") {
    Matrix H(2, 2);
    H << 1.0, 0.0, 0.0, -1.0;
    const auto sol = solve_kkt_projected(matrix_op(H), row({1.0, 0.0}), vec({0.0, 1.0}),
                                         vec({0.5}));
    CHECK(sol.indefinite);
    CHECK(sol.min_curvature < 0.0);
    // The returned step is the last CG iterate on top of the particular
    // solution, so it still satisfies the linearized constraint.
    CHECK((vec({0.5}) + row({1.0, 0.0}) * sol.step).norm() < 1e-12);
}

TEST_CASE("dense oracle hand eliminations") {
    SUBCASE("identity Hessian") {
        const auto sol =
            dense_kkt_oracle(Matrix::Identity(2, 2), row({1.0, 1.0}), vec({0.0, 0.0}),
                             vec({-1.0}));
        CHECK((sol.step - vec({0.5, 0.5})).norm() < 1e-14);
        CHECK(sol.multiplier(0) == doctest::Approx(0.5));
    }
    SUBCASE("scaled Hessian") {
        const auto sol = dense_kkt_oracle(2.0 * Matrix::Identity(2, 2), row({1.0, 0.0}),
                                          vec({2.0, 0.0}), vec({1.0}));
        CHECK((sol.step - vec({-1.0, 0.0})).norm() < 1e-14);
        CHECK(sol.multiplier(0) == doctest::Approx(0.0));
    }
    SUBCASE("unconstrained reduction at m=0") {
        Matrix H(2, 2);
        H << 2.0, 0.0, 0.0, 4.0;
        const auto sol = dense_kkt_oracle(H, Matrix(0, 2), vec({2.0, 4.0}), Vector(0));
        CHECK((sol.step - vec({-1.0, -1.0})).norm() < 1e-14);
        CHECK(sol.multiplier.size() == 0);
    }
    SUBCASE("singular system throws") {
        CHECK_THROWS_AS(
            dense_kkt_oracle(Matrix::Zero(2, 2), Matrix(0, 2), vec({1.0, 1.0}), Vector(0)),
            SingularKktError);
    }
}

TEST_CASE("orthonormalize hand examples") {
    SUBCASE("rank-1 input collapses") {
        const Matrix Q = orthonormalize({vec({1.0, 1.0}), vec({2.0, 2.0})}, 1e-10);
        REQUIRE(Q.cols() == 1);
        CHECK(std::abs(std::abs(Q(0, 0)) - 1.0 / std::sqrt(2.0)) < 1e-14);
    }
    SUBCASE("already orthonormal") {
        const Matrix Q = orthonormalize({vec({1.0, 0.0}), vec({0.0, 1.0})}, 1e-10);
        REQUIRE(Q.cols() == 2);
        CHECK((Q - Matrix::Identity(2, 2)).norm() < 1e-14);
    }
    SUBCASE("near-duplicate dropped") {
        const Matrix Q = orthonormalize({vec({1.0, 0.0}), vec({1.0, 1e-14})}, 1e-10);
        CHECK(Q.cols() == 1);
    }
    SUBCASE("empty input") {
        const Matrix Q = orthonormalize({}, 1e-10);
        CHECK(Q.cols() == 0);
    }
}

TEST_CASE("orthonormalize produces orthonormal columns") {
    testutil::Rng rng(37);
    for (int rep = 0; rep < 25; ++rep) {
        const int n = 5 + static_cast<int>(rng.uniform(0.0, 40.0));
        const int count = 1 + static_cast<int>(rng.uniform(0.0, 10.0));
        std::vector<Vector> cols;
        for (int j = 0; j < count; ++j) cols.push_back(rng.vector(n, -3.0, 3.0));
        // Insert a deliberate duplicate to exercise dropping.
        cols.push_back(cols.front());
        const Matrix Q = orthonormalize(cols, 1e-10);
        const Matrix G = Q.transpose() * Q;
        CHECK((G - Matrix::Identity(Q.cols(), Q.cols())).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(Q.cols() <= static_cast<Eigen::Index>(cols.size()) - 1);
    }
}

TEST_CASE("orthonormalize is deterministic in input order") {
    testutil::Rng rng(41);
    std::vector<Vector> cols;
    for (int j = 0; j < 6; ++j) cols.push_back(rng.vector(12));
    const Matrix a = orthonormalize(cols, 1e-10);
    const Matrix b = orthonormalize(cols, 1e-10);
    CHECK((a - b).norm() == 0.0);
}
