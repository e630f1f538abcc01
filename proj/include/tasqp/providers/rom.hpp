#pragma once

#include <Eigen/LU>

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "tasqp/model.hpp"
#include "tasqp/providers/fom1d.hpp"

namespace tasqp::providers {

/// Full-order snapshots backing the reduced basis: states and adjoints
/// from every visited point, sensitivities from the current build point
/// only. Serializable to a plain text format, one vector per line:
///   <kind> <v_0> <v_1> ...
/// with kind in {state, adjoint, sensitivity, anchor} and values written
/// in exponent notation with 17 significant digits.
class SnapshotRegistry {
public:
    void add_state(const Vector& y) { states_.push_back(y); }
    void add_adjoint(const Vector& p) { adjoints_.push_back(p); }
    void set_sensitivities(const Matrix& sens);
    void add_anchor(const Vector& u) { anchors_.push_back(u); }
    bool has_anchor(const Vector& u) const;

    const std::vector<Vector>& states() const { return states_; }
    const std::vector<Vector>& adjoints() const { return adjoints_; }
    const std::vector<Vector>& sensitivities() const { return sensitivities_; }
    const std::vector<Vector>& anchors() const { return anchors_; }

    void save(const std::string& path) const;
    static SnapshotRegistry load(const std::string& path);

private:
    std::vector<Vector> states_;
    std::vector<Vector> adjoints_;
    std::vector<Vector> sensitivities_;
    std::vector<Vector> anchors_;
};

/// Galerkin reduced-order model of the Burgers FOM over an orthonormal
/// basis V: solve V' R(V yr; u) = 0, evaluate objective and constraint on
/// the prolonged state. Error indicators are scaled norms of the
/// full-order residual at the prolonged reduced state.
class RomModel : public TunableModel {
public:
    RomModel(const Fom1D& fom, Matrix basis, Vector build_point, int level, double kappa_f,
             double kappa_c);

    int dimension() const override { return fom_.dimension(); }
    int constraint_count() const override { return 1; }
    double objective(const Vector& u) const override;
    Vector constraints(const Vector& u) const override;
    Vector objective_gradient(const Vector& u) const override;
    Matrix constraint_jacobian(const Vector& u) const override;
    double objective_error(const Vector& u) const override;
    double constraint_error(const Vector& u) const override;
    const Vector& build_point() const override { return build_point_; }
    int refinement_level() const override { return level_; }
    bool has_hessian() const override { return true; }
    LinearOperator hessian_operator(const Vector& u, const Vector& lambda) const override;
    int reduced_dimension() const override { return static_cast<int>(basis_.cols()); }

    const Matrix& basis() const { return basis_; }
    /// Full-order residual norm at the prolonged reduced state.
    double residual_indicator(const Vector& u) const;
    double kappa_f() const { return kappa_f_; }
    double kappa_c() const { return kappa_c_; }

private:
    struct Reduced {
        bool failed = false;
        Vector yr;        // reduced state
        Vector y_full;    // V yr
        double res_norm = 0.0;  // ||R(V yr; u)||
        Eigen::PartialPivLU<Matrix> lu;  // reduced Jacobian at yr
        bool have_pf = false, have_pc = false, have_sens = false;
        Vector p_f, p_c;  // reduced adjoints
        Matrix sens;      // reduced sensitivities
    };

    std::shared_ptr<Reduced> solve_reduced(const Vector& u) const;

    const Fom1D& fom_;
    Matrix basis_;
    Vector build_point_;
    int level_;
    double kappa_f_, kappa_c_;
    Vector y_init_;    // prolongation anchor for the Newton initial guess
    Matrix reduced_B_; // V' dR/du

    mutable std::mutex mutex_;
    mutable std::map<std::vector<double>, std::shared_ptr<Reduced>> cache_;
};

/// Builds RomModels from an evolving snapshot registry. A build at x
/// solves the FOM state, both adjoints, and the control sensitivities at
/// x; a refinement adds state and adjoint snapshots at the requested
/// point. Per-block snapshots are orthonormalized individually and the
/// concatenation is orthonormalized again.
class RomProvider : public ModelProvider {
public:
    struct Options {
        double drop_tol = 1e-9;   ///< column drop tolerance in both stages
        int max_basis = 60;       ///< basis-size cap
        double kappa_floor = 1e-8;
    };

    explicit RomProvider(const Fom1D& fom) : RomProvider(fom, Options{}) {}
    RomProvider(const Fom1D& fom, Options opts);

    ModelPtr build(const Vector& x, double tau, double rho, const Vector& lambda) override;
    ModelPtr refine(const TunableModel& model, const Vector& at, double tau, double rho,
                    const Vector& lambda) override;
    const ProblemFunctions& truth() const override { return fom_; }

    const SnapshotRegistry& registry() const { return registry_; }
    SnapshotRegistry& registry() { return registry_; }

    /// Assemble a model over the current registry (exposed for tests).
    ModelPtr assemble(const Vector& build_point, int level) const;

private:
    void register_point(const Vector& x, bool with_sensitivities);
    void calibrate(const Vector& x);

    const Fom1D& fom_;
    SnapshotRegistry registry_;
    Options opts_;
    double kappa_f_ = 1.0;
    double kappa_c_ = 1.0;
    ModelPtr last_model_;
};

}  // namespace tasqp::providers
