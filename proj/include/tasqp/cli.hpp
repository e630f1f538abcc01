#pragma once

#include <ostream>
#include <string>

#include "tasqp/providers/fom1d.hpp"

namespace tasqp::cli {

/// Fully validated run configuration; every field carries a default and
/// unknown keys are rejected.
struct RunConfig {
    std::string problem_id = "p1";  // p1 | p2 | p3 | fom1d
    providers::Fom1D::Options fom;

    std::string solver = "exact";          // exact | inexact
    std::string provider = "exact-wrapper";  // exact-wrapper | synthetic | rom

    // Algorithm parameters (defaults recorded in every output header).
    double c1 = 1e-4;
    double beta1 = 0.5;
    double beta2 = 0.5;
    double sigma = 0.1;
    double rho0 = 1.0;
    double omega = 0.9;
    double a1 = 0.5;
    double a2 = 1.0;
    double r0 = 1.0;
    double gamma = 0.5;
    double tau0 = 1e-2;
    double tau_fg = 0.5;
    double tau_cg = 0.5;
    double tau_c = 0.5;
    double tol_f = 1e-6;
    double tol_c = 1e-6;
    int max_iter = 100;
    int max_refinements = 10;
    int extra_backsteps = 5;
    int max_inner = 50;
    std::string hessian = "identity";  // identity | damped-bfgs | problem
    bool instrument = true;
    double synthetic_decay = 0.5;
    double synthetic_eps0 = 0.1;
    double rom_drop_tol = 1e-9;
    int rom_max_basis = 60;

    long seed = 0;
    std::string history_path;
    std::string summary_path;  // empty: summary to stdout

    /// Parse and validate; throws ConfigError.
    static RunConfig from_json_file(const std::string& path);
    static RunConfig from_json_text(const std::string& text);

    /// Canonical single-line JSON of the effective (defaulted) config.
    std::string effective_json() const;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitSolverFailure = 3;

/// Execute the configured run; history and summary are written on any
/// solver outcome, nothing is written on a config error.
int run(const std::string& config_path, std::ostream& out, std::ostream& err);

/// Side-by-side report of two history files.
int compare(const std::string& history_a, const std::string& history_b, std::ostream& out,
            std::ostream& err);

}  // namespace tasqp::cli
