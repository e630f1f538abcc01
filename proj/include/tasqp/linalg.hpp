#pragma once

#include <Eigen/Cholesky>

#include <limits>
#include <vector>

#include "tasqp/errors.hpp"
#include "tasqp/types.hpp"

namespace tasqp::linalg {

/// Solution of one SQP step system.
struct KktSolution {
    Vector step;        ///< s
    Vector multiplier;  ///< lambda
    int cg_iterations = 0;
    double residual_norm = 0.0;  ///< reduced CG residual at exit
    bool indefinite = false;     ///< nonpositive curvature detected; step is the last CG iterate
    double min_curvature = std::numeric_limits<double>::infinity();  ///< smallest Rayleigh quotient sampled
};

struct CgOptions {
    double tol = -1.0;  ///< <=0: use min(1e-10, 0.1*||rhs||)
    int max_iterations = -1;  ///< <=0: use 2n
};

/// Cached Cholesky factor of J J^T with a rank guard.
/// The factorization is reused for the particular solution, projector
/// applications, and multiplier recovery within one step computation.
class RowRangeSolver {
public:
    /// Throws RankDeficientError when J J^T is singular beyond
    /// tol = 1e-12 * ||J||^2 (Frobenius).
    explicit RowRangeSolver(const Matrix& J);

    /// (J J^T)^{-1} w
    Vector solve(const Vector& w) const;

    const Matrix& jacobian() const { return J_; }
    int rows() const { return static_cast<int>(J_.rows()); }
    int cols() const { return static_cast<int>(J_.cols()); }

private:
    Matrix J_;
    Eigen::LLT<Matrix> llt_;
};

/// Minimum norm solution of J s = -c, i.e. s = -J^T (J J^T)^{-1} c.
Vector min_norm_particular(const Matrix& J, const Vector& c);

/// Apply P = I - J^T (J J^T)^{-1} J to v without forming P.
Vector apply_nullspace_projector(const Matrix& J, const Vector& v);

/// Solve the step system
///   [ H  -J^T ] [ s      ]   [ -g ]
///   [ J   0   ] [ lambda ] = [ -c ]
/// via the nullspace reduction: s = s_c + P s0 with s0 from conjugate
/// gradients on P H P, then lambda = (J J^T)^{-1} J (g + H s).
/// H must be symmetric and positive definite on the nullspace of J;
/// nonpositive curvature truncates CG and flags the result.
/// m = 0 is allowed and reduces to unconstrained CG on H.
KktSolution solve_kkt_projected(const LinearOperator& H_apply, const Matrix& J, const Vector& g,
                                const Vector& c, const CgOptions& opts = {});

/// Direct factorization of the dense (n+m)x(n+m) block system above.
/// Test oracle and small-problem fallback.
KktSolution dense_kkt_oracle(const Matrix& H, const Matrix& J, const Vector& g, const Vector& c);

/// Modified Gram-Schmidt with one reorthogonalization pass.
/// Columns whose residual after projection onto prior columns falls below
/// drop_tol times their original norm are dropped. Deterministic in input
/// order; empty input yields a 0x0 matrix.
Matrix orthonormalize(const std::vector<Vector>& columns, double drop_tol);

}  // namespace tasqp::linalg
