#include "tasqp/providers/rom.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "tasqp/errors.hpp"
#include "tasqp/linalg.hpp"

namespace tasqp::providers {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_vector_line(const char* kind, const Vector& v) {
    std::string line(kind);
    char buf[32];
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof(buf), " %.16e", v(i));
        line += buf;
    }
    return line;
}

}  // namespace

void SnapshotRegistry::set_sensitivities(const Matrix& sens) {
    sensitivities_.clear();
    for (Eigen::Index j = 0; j < sens.cols(); ++j) sensitivities_.push_back(sens.col(j));
}

bool SnapshotRegistry::has_anchor(const Vector& u) const {
    for (const Vector& a : anchors_) {
        if (a.size() == u.size() && (a - u).lpNorm<Eigen::Infinity>() <= 1e-15) return true;
    }
    return false;
}

void SnapshotRegistry::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open snapshot file for writing: " + path);
    out << "# tasqp-snapshots v1\n";
    for (const Vector& v : states_) out << format_vector_line("state", v) << "\n";
    for (const Vector& v : adjoints_) out << format_vector_line("adjoint", v) << "\n";
    for (const Vector& v : sensitivities_) out << format_vector_line("sensitivity", v) << "\n";
    for (const Vector& v : anchors_) out << format_vector_line("anchor", v) << "\n";
}

SnapshotRegistry SnapshotRegistry::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open snapshot file: " + path);
    SnapshotRegistry reg;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream iss(line);
        std::string kind;
        iss >> kind;
        std::vector<double> values;
        double v;
        while (iss >> v) values.push_back(v);
        Vector vec = Eigen::Map<const Vector>(values.data(), values.size());
        if (kind == "state") {
            reg.states_.push_back(vec);
        } else if (kind == "adjoint") {
            reg.adjoints_.push_back(vec);
        } else if (kind == "sensitivity") {
            reg.sensitivities_.push_back(vec);
        } else if (kind == "anchor") {
            reg.anchors_.push_back(vec);
        } else {
            throw ParseError("unknown snapshot kind '" + kind + "'", line_no);
        }
    }
    return reg;
}

RomModel::RomModel(const Fom1D& fom, Matrix basis, Vector build_point, int level, double kappa_f,
                   double kappa_c)
    : fom_(fom),
      basis_(std::move(basis)),
      build_point_(std::move(build_point)),
      level_(level),
      kappa_f_(kappa_f),
      kappa_c_(kappa_c) {
    y_init_ = fom_.solve_state(build_point_);
    reduced_B_ = basis_.transpose() * fom_.residual_control_jacobian();
}

std::shared_ptr<RomModel::Reduced> RomModel::solve_reduced(const Vector& u) const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::vector<double> key(u.data(), u.data() + u.size());
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    if (cache_.size() > 512) cache_.clear();

    auto red = std::make_shared<Reduced>();
    const Matrix& V = basis_;
    Vector yr = V.transpose() * y_init_;
    bool converged = false;
    double res = (V.transpose() * fom_.residual(V * yr, u)).norm();
    for (int iter = 0; iter < 60 && !converged; ++iter) {
        if (res <= 1e-12) {
            converged = true;
            break;
        }
        const Vector y_full = V * yr;
        const Vector r_hat = V.transpose() * fom_.residual(y_full, u);
        Matrix J_hat = V.transpose() * fom_.state_jacobian(y_full) * V;
        Eigen::PartialPivLU<Matrix> lu(J_hat);
        const Vector step = lu.solve(-r_hat);
        double t = 1.0;
        bool stepped = false;
        while (t > 1e-6) {
            const Vector yr_try = yr + t * step;
            const double res_try =
                (V.transpose() * fom_.residual(V * yr_try, u)).norm();
            if (res_try <= (1.0 - 1e-4 * t) * res) {
                yr = yr_try;
                res = res_try;
                stepped = true;
                break;
            }
            t *= 0.5;
        }
        if (!stepped) break;
    }
    converged = converged || res <= 1e-12;

    if (!converged) {
        red->failed = true;
    } else {
        red->yr = yr;
        red->y_full = V * yr;
        red->res_norm = fom_.residual(red->y_full, u).norm();
        red->lu.compute(Matrix(V.transpose() * fom_.state_jacobian(red->y_full) * V));
        fom_.counter().add_rom_solve();
    }
    cache_.emplace(std::move(key), red);
    return red;
}

double RomModel::objective(const Vector& u) const {
    auto red = solve_reduced(u);
    if (red->failed) return kInf;
    return fom_.objective_of_state(red->y_full, u);
}

Vector RomModel::constraints(const Vector& u) const {
    auto red = solve_reduced(u);
    Vector h(1);
    h(0) = red->failed ? 0.0 : fom_.constraint_of_state(red->y_full);
    return h;
}

Vector RomModel::objective_gradient(const Vector& u) const {
    auto red = solve_reduced(u);
    if (red->failed) throw FomSolveFailure("reduced state solve failed at a gradient point");
    std::lock_guard<std::mutex> lock(mutex_);
    if (!red->have_pf) {
        red->p_f = red->lu.transpose().solve(
            Vector(-basis_.transpose() * fom_.objective_state_gradient(red->y_full)));
        red->have_pf = true;
    }
    return fom_.options().reg_weight * (fom_.control_gramian() * u) +
           reduced_B_.transpose() * red->p_f;
}

Matrix RomModel::constraint_jacobian(const Vector& u) const {
    auto red = solve_reduced(u);
    if (red->failed) throw FomSolveFailure("reduced state solve failed at a Jacobian point");
    std::lock_guard<std::mutex> lock(mutex_);
    if (!red->have_pc) {
        red->p_c = red->lu.transpose().solve(
            Vector(-basis_.transpose() * fom_.constraint_state_gradient(red->y_full)));
        red->have_pc = true;
    }
    Matrix J(1, dimension());
    J.row(0) = (reduced_B_.transpose() * red->p_c).transpose();
    return J;
}

double RomModel::residual_indicator(const Vector& u) const {
    auto red = solve_reduced(u);
    if (red->failed) return kInf;
    return red->res_norm;
}

double RomModel::objective_error(const Vector& u) const {
    return kappa_f_ * residual_indicator(u);
}

double RomModel::constraint_error(const Vector& u) const {
    return kappa_c_ * residual_indicator(u);
}

LinearOperator RomModel::hessian_operator(const Vector& u, const Vector& lambda) const {
    auto red = solve_reduced(u);
    if (red->failed) throw FomSolveFailure("reduced state solve failed at a Hessian point");
    {
        std::lock_guard<std::mutex> lock(mutex_);
        if (!red->have_sens) {
            red->sens = red->lu.solve(Matrix(-reduced_B_));
            red->have_sens = true;
        }
    }
    const Matrix prolonged = basis_ * red->sens;  // full-order sensitivity approximation
    const double lam = lambda.size() > 0 ? lambda(0) : 0.0;
    const double constraint_factor = (lam < 0.0) ? -2.0 * lam : 0.0;
    const Matrix G = fom_.control_gramian();
    const Vector tw = fom_.quad_weights();
    const double reg = fom_.options().reg_weight;
    return [prolonged, G, tw, reg, constraint_factor](const Vector& v) {
        const Vector yv = prolonged * v;
        const Vector weighted = (tw.array() * yv.array()).matrix();
        return Vector((1.0 + constraint_factor) * (prolonged.transpose() * weighted) +
                      reg * (G * v));
    };
}

RomProvider::RomProvider(const Fom1D& fom, Options opts) : fom_(fom), opts_(opts) {}

void RomProvider::register_point(const Vector& x, bool with_sensitivities) {
    if (!registry_.has_anchor(x)) {
        registry_.add_state(fom_.solve_state(x));
        registry_.add_adjoint(fom_.solve_objective_adjoint(x));
        registry_.add_adjoint(fom_.solve_constraint_adjoint(x));
        registry_.add_anchor(x);
    }
    if (with_sensitivities) {
        registry_.set_sensitivities(fom_.solve_sensitivities(x));
    }
}

ModelPtr RomProvider::assemble(const Vector& build_point, int level) const {
    const Matrix S_states = linalg::orthonormalize(registry_.states(), opts_.drop_tol);
    const Matrix S_adjoints = linalg::orthonormalize(registry_.adjoints(), opts_.drop_tol);
    const Matrix S_sens = linalg::orthonormalize(registry_.sensitivities(), opts_.drop_tol);

    std::vector<Vector> stacked;
    for (Eigen::Index j = 0; j < S_states.cols(); ++j) stacked.push_back(S_states.col(j));
    for (Eigen::Index j = 0; j < S_adjoints.cols(); ++j) stacked.push_back(S_adjoints.col(j));
    for (Eigen::Index j = 0; j < S_sens.cols(); ++j) stacked.push_back(S_sens.col(j));
    Matrix V = linalg::orthonormalize(stacked, opts_.drop_tol);

    if (V.cols() > opts_.max_basis) {
        throw CannotMeetTolerance("reduced basis exceeded its size cap");
    }

    return std::make_shared<RomModel>(fom_, V, build_point, level, kappa_f_, kappa_c_);
}

void RomProvider::calibrate(const Vector& x) {
    // The FOM solution at x was just computed, so the previous model's true
    // error is measurable here; its ratio to the residual indicator
    // calibrates the indicator scale for the models that follow.
    const auto* prev = dynamic_cast<const RomModel*>(last_model_.get());
    if (prev == nullptr) return;
    const double res = prev->residual_indicator(x);
    if (!std::isfinite(res) || res <= 1e-14) return;
    const Vector y_exact = fom_.solve_state(x);
    const double f_err = std::abs(prev->objective(x) - fom_.objective_of_state(y_exact, x));
    const double c_err =
        std::abs(prev->constraints(x)(0) - fom_.constraint_of_state(y_exact));
    kappa_f_ = std::min(std::max(f_err / res, opts_.kappa_floor), 1e6);
    kappa_c_ = std::min(std::max(c_err / res, opts_.kappa_floor), 1e6);
}

ModelPtr RomProvider::build(const Vector& x, double tau, double rho, const Vector& lambda) {
    (void)rho;
    (void)lambda;
    if (!(tau > 0.0)) throw CannotMeetTolerance("ROM build asked for nonpositive tolerance");
    register_point(x, true);
    calibrate(x);
    ModelPtr model = assemble(x, 0);
    last_model_ = model;
    return model;
}

ModelPtr RomProvider::refine(const TunableModel& model, const Vector& at, double tau, double rho,
                             const Vector& lambda) {
    (void)tau;
    (void)rho;
    (void)lambda;
    const bool known = registry_.has_anchor(at);
    if (known) {
        // Nothing new can be added at this point; a rebuild would loop.
        throw CannotMeetTolerance("ROM refinement at an already-registered point");
    }
    register_point(at, false);
    ModelPtr refined = assemble(model.build_point(), model.refinement_level() + 1);
    last_model_ = refined;
    return refined;
}

}  // namespace tasqp::providers
