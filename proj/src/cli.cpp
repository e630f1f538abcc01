#include "tasqp/cli.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "tasqp/history.hpp"
#include "tasqp/providers/analytic.hpp"
#include "tasqp/providers/model_providers.hpp"
#include "tasqp/providers/rom.hpp"
#include "tasqp/sqp_inexact.hpp"

namespace tasqp::cli {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* key : allowed) {
            if (it.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

double get_number(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
    return obj[key].get<double>();
}

int get_int(const json& obj, const char* key, int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer()) {
        throw ConfigError(std::string("'") + key + "' must be an integer");
    }
    return obj[key].get<int>();
}

std::string get_string(const json& obj, const char* key, const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
    return obj[key].get<std::string>();
}

bool get_bool(const json& obj, const char* key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) throw ConfigError(std::string("'") + key + "' must be a boolean");
    return obj[key].get<bool>();
}

void require_open01(double v, const char* name) {
    if (!(v > 0.0 && v < 1.0)) throw ConfigError(std::string(name) + " must lie in (0,1)");
}

void require_positive(double v, const char* name) {
    if (!(v > 0.0)) throw ConfigError(std::string(name) + " must be positive");
}

HessianStrategy hessian_from_name(const std::string& name) {
    if (name == "identity") return HessianStrategy::Identity;
    if (name == "damped-bfgs") return HessianStrategy::DampedBfgs;
    if (name == "problem") return HessianStrategy::ProblemSupplied;
    throw ConfigError("unknown hessian strategy '" + name + "'");
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config root must be an object");
    reject_unknown_keys(root, {"problem", "solver", "provider", "algorithm", "seed", "output"},
                        "config root");

    RunConfig cfg;

    if (!root.contains("problem") || !root["problem"].is_object() ||
        !root["problem"].contains("id")) {
        throw ConfigError("config requires a 'problem' object with an 'id'");
    }
    const json& prob = root["problem"];
    cfg.problem_id = get_string(prob, "id", "");
    if (cfg.problem_id == "fom1d") {
        reject_unknown_keys(prob,
                            {"id", "grid_size", "viscosity", "control_dim", "y_left", "y_right",
                             "reg_weight", "target_value"},
                            "problem");
        cfg.fom.grid_size = get_int(prob, "grid_size", cfg.fom.grid_size);
        cfg.fom.viscosity = get_number(prob, "viscosity", cfg.fom.viscosity);
        cfg.fom.control_dim = get_int(prob, "control_dim", cfg.fom.control_dim);
        cfg.fom.y_left = get_number(prob, "y_left", cfg.fom.y_left);
        cfg.fom.y_right = get_number(prob, "y_right", cfg.fom.y_right);
        cfg.fom.reg_weight = get_number(prob, "reg_weight", cfg.fom.reg_weight);
        cfg.fom.target_value = get_number(prob, "target_value", cfg.fom.target_value);
        if (cfg.fom.grid_size < 8) throw ConfigError("grid_size must be at least 8");
        require_positive(cfg.fom.viscosity, "viscosity");
        if (cfg.fom.control_dim < 2 || cfg.fom.control_dim % 2 != 0) {
            throw ConfigError("control_dim must be even and at least 2");
        }
        if (cfg.fom.reg_weight < 0.0) throw ConfigError("reg_weight must be nonnegative");
    } else if (cfg.problem_id == "p1" || cfg.problem_id == "p2" || cfg.problem_id == "p3") {
        reject_unknown_keys(prob, {"id"}, "problem");
    } else {
        throw ConfigError("unknown problem id '" + cfg.problem_id + "'");
    }

    cfg.solver = get_string(root, "solver", cfg.solver);
    if (cfg.solver != "exact" && cfg.solver != "inexact") {
        throw ConfigError("solver must be 'exact' or 'inexact'");
    }
    cfg.provider = get_string(root, "provider", cfg.provider);
    if (cfg.provider != "exact-wrapper" && cfg.provider != "synthetic" && cfg.provider != "rom") {
        throw ConfigError("provider must be 'exact-wrapper', 'synthetic', or 'rom'");
    }
    if (cfg.provider == "rom" && cfg.problem_id != "fom1d") {
        throw ConfigError("the rom provider requires the fom1d problem");
    }

    if (root.contains("algorithm")) {
        const json& alg = root["algorithm"];
        if (!alg.is_object()) throw ConfigError("'algorithm' must be an object");
        reject_unknown_keys(alg,
                            {"c1", "beta1", "beta2", "sigma", "rho0", "omega", "a1", "a2", "r0",
                             "gamma", "tau0", "tau_fg", "tau_cg", "tau_c", "tol_f", "tol_c",
                             "max_iter", "max_refinements", "extra_backsteps", "max_inner",
                             "hessian", "instrument", "synthetic_decay", "synthetic_eps0",
                             "rom_drop_tol", "rom_max_basis"},
                            "algorithm");
        cfg.c1 = get_number(alg, "c1", cfg.c1);
        cfg.beta1 = get_number(alg, "beta1", cfg.beta1);
        cfg.beta2 = get_number(alg, "beta2", cfg.beta2);
        cfg.sigma = get_number(alg, "sigma", cfg.sigma);
        cfg.rho0 = get_number(alg, "rho0", cfg.rho0);
        cfg.omega = get_number(alg, "omega", cfg.omega);
        cfg.a1 = get_number(alg, "a1", cfg.a1);
        cfg.a2 = get_number(alg, "a2", cfg.a2);
        cfg.r0 = get_number(alg, "r0", cfg.r0);
        cfg.gamma = get_number(alg, "gamma", cfg.gamma);
        cfg.tau0 = get_number(alg, "tau0", cfg.tau0);
        cfg.tau_fg = get_number(alg, "tau_fg", cfg.tau_fg);
        cfg.tau_cg = get_number(alg, "tau_cg", cfg.tau_cg);
        cfg.tau_c = get_number(alg, "tau_c", cfg.tau_c);
        cfg.tol_f = get_number(alg, "tol_f", cfg.tol_f);
        cfg.tol_c = get_number(alg, "tol_c", cfg.tol_c);
        cfg.max_iter = get_int(alg, "max_iter", cfg.max_iter);
        cfg.max_refinements = get_int(alg, "max_refinements", cfg.max_refinements);
        cfg.extra_backsteps = get_int(alg, "extra_backsteps", cfg.extra_backsteps);
        cfg.max_inner = get_int(alg, "max_inner", cfg.max_inner);
        cfg.hessian = get_string(alg, "hessian", cfg.hessian);
        cfg.instrument = get_bool(alg, "instrument", cfg.instrument);
        cfg.synthetic_decay = get_number(alg, "synthetic_decay", cfg.synthetic_decay);
        cfg.synthetic_eps0 = get_number(alg, "synthetic_eps0", cfg.synthetic_eps0);
        cfg.rom_drop_tol = get_number(alg, "rom_drop_tol", cfg.rom_drop_tol);
        cfg.rom_max_basis = get_int(alg, "rom_max_basis", cfg.rom_max_basis);
    }

    require_open01(cfg.c1, "c1");
    require_open01(cfg.beta1, "beta1");
    if (!(cfg.beta2 >= cfg.beta1 && cfg.beta2 < 1.0)) {
        throw ConfigError("beta2 must lie in [beta1, 1)");
    }
    require_positive(cfg.sigma, "sigma");
    require_positive(cfg.rho0, "rho0");
    require_open01(cfg.omega, "omega");
    require_open01(cfg.a1, "a1");
    if (!(cfg.a2 > 0.0 && cfg.a2 <= 1.0)) throw ConfigError("a2 must lie in (0,1]");
    require_positive(cfg.r0, "r0");
    require_open01(cfg.gamma, "gamma");
    require_positive(cfg.tau0, "tau0");
    require_open01(cfg.tau_fg, "tau_fg");
    require_open01(cfg.tau_cg, "tau_cg");
    require_open01(cfg.tau_c, "tau_c");
    require_positive(cfg.tol_f, "tol_f");
    require_positive(cfg.tol_c, "tol_c");
    if (cfg.max_iter < 1) throw ConfigError("max_iter must be at least 1");
    if (cfg.max_refinements < 1) throw ConfigError("max_refinements must be at least 1");
    if (cfg.extra_backsteps < 0) throw ConfigError("extra_backsteps must be nonnegative");
    if (cfg.max_inner < 1) throw ConfigError("max_inner must be at least 1");
    hessian_from_name(cfg.hessian);
    require_open01(cfg.synthetic_decay, "synthetic_decay");
    require_positive(cfg.synthetic_eps0, "synthetic_eps0");
    require_positive(cfg.rom_drop_tol, "rom_drop_tol");
    if (cfg.rom_max_basis < 2) throw ConfigError("rom_max_basis must be at least 2");

    if (root.contains("seed")) {
        if (!root["seed"].is_number_integer()) throw ConfigError("'seed' must be an integer");
        cfg.seed = root["seed"].get<long>();
    }

    if (!root.contains("output") || !root["output"].is_object()) {
        throw ConfigError("config requires an 'output' object");
    }
    const json& out = root["output"];
    reject_unknown_keys(out, {"history", "summary"}, "output");
    cfg.history_path = get_string(out, "history", "");
    cfg.summary_path = get_string(out, "summary", "");
    if (cfg.history_path.empty()) throw ConfigError("output.history path is required");

    return cfg;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string RunConfig::effective_json() const {
    json prob{{"id", problem_id}};
    if (problem_id == "fom1d") {
        prob["grid_size"] = fom.grid_size;
        prob["viscosity"] = fom.viscosity;
        prob["control_dim"] = fom.control_dim;
        prob["y_left"] = fom.y_left;
        prob["y_right"] = fom.y_right;
        prob["reg_weight"] = fom.reg_weight;
        prob["target_value"] = fom.target_value;
    }
    json root{
        {"problem", prob},
        {"solver", solver},
        {"provider", provider},
        {"algorithm",
         {{"c1", c1},
          {"beta1", beta1},
          {"beta2", beta2},
          {"sigma", sigma},
          {"rho0", rho0},
          {"omega", omega},
          {"a1", a1},
          {"a2", a2},
          {"r0", r0},
          {"gamma", gamma},
          {"tau0", tau0},
          {"tau_fg", tau_fg},
          {"tau_cg", tau_cg},
          {"tau_c", tau_c},
          {"tol_f", tol_f},
          {"tol_c", tol_c},
          {"max_iter", max_iter},
          {"max_refinements", max_refinements},
          {"extra_backsteps", extra_backsteps},
          {"max_inner", max_inner},
          {"hessian", hessian},
          {"instrument", instrument},
          {"synthetic_decay", synthetic_decay},
          {"synthetic_eps0", synthetic_eps0},
          {"rom_drop_tol", rom_drop_tol},
          {"rom_max_basis", rom_max_basis}}},
        {"seed", seed},
        {"output", {{"history", history_path}, {"summary", summary_path}}},
    };
    return root.dump();
}

namespace {

struct RunOutcome {
    SolveStatus status = SolveStatus::MaxIter;
    long iterations = 0;
    EvalCounts evals;
    double final_objective = 0.0;
    double final_feasibility = 0.0;
    double final_lagrangian_norm = 0.0;
    std::vector<HistoryRow> rows;
};

std::shared_ptr<ProblemFunctions> make_problem(const RunConfig& cfg) {
    if (cfg.problem_id == "p1") return providers::make_p1();
    if (cfg.problem_id == "p2") return providers::make_p2();
    if (cfg.problem_id == "p3") return providers::make_p3();
    return std::make_shared<providers::Fom1D>(cfg.fom);
}

Vector start_point(const RunConfig& cfg, const ProblemFunctions& problem) {
    if (const auto* analytic = dynamic_cast<const providers::AnalyticProblem*>(&problem)) {
        return analytic->default_start();
    }
    (void)cfg;
    return Vector::Zero(problem.dimension());
}

RunOutcome execute(const RunConfig& cfg) {
    auto problem = make_problem(cfg);
    const Vector x0 = start_point(cfg, *problem);

    SolverConfig base;
    base.tol_f = cfg.tol_f;
    base.tol_c = cfg.tol_c;
    base.max_iter = cfg.max_iter;
    base.rho0 = cfg.rho0;
    base.sigma = cfg.sigma;
    base.line_search.c1 = cfg.c1;
    base.line_search.beta1 = cfg.beta1;
    base.line_search.beta2 = cfg.beta2;
    base.hessian_strategy = hessian_from_name(cfg.hessian);

    RunOutcome outcome;
    Vector x_final;
    Vector lambda_final;

    if (cfg.solver == "exact") {
        ExactResult res = solve_exact(*problem, x0, base);
        outcome.status = res.status;
        outcome.iterations = res.state.k;
        outcome.evals = res.state.eval_counts;
        x_final = res.state.x;
        lambda_final = res.state.lambda;
        for (const IterationRecord& r : res.records) {
            HistoryRow row;
            row.k = r.k;
            row.model_fonc = r.stationarity;
            row.model_feas = r.feasibility;
            row.true_fonc = r.stationarity;
            row.merit = r.merit;
            row.rho = r.rho;
            row.alpha = r.alpha;
            row.fom_evals = r.evals.fom_total();
            row.rom_evals = r.evals.rom_solve;
            row.basis_size = 0;
            outcome.rows.push_back(row);
        }
    } else {
        ToleranceLedger ledger;
        ledger.omega = cfg.omega;
        ledger.a1 = cfg.a1;
        ledger.a2 = cfg.a2;
        ledger.r0 = cfg.r0;
        ledger.gamma = cfg.gamma;
        ledger.tau_current = cfg.tau0;
        ledger.tau_fg = cfg.tau_fg;
        ledger.tau_cg = cfg.tau_cg;
        ledger.tau_c = cfg.tau_c;

        InexactConfig icfg;
        icfg.base = base;
        icfg.max_refinements = cfg.max_refinements;
        icfg.extra_backsteps = cfg.extra_backsteps;
        icfg.max_inner = cfg.max_inner;
        icfg.instrument_truth = cfg.instrument;

        std::unique_ptr<ModelProvider> provider;
        if (cfg.provider == "exact-wrapper") {
            provider = std::make_unique<providers::ExactWrapperProvider>(*problem);
        } else if (cfg.provider == "synthetic") {
            provider = std::make_unique<providers::SyntheticProvider>(
                *problem, cfg.synthetic_decay, ledger, cfg.synthetic_eps0);
        } else {
            auto* fom = dynamic_cast<providers::Fom1D*>(problem.get());
            providers::RomProvider::Options ropts;
            ropts.drop_tol = cfg.rom_drop_tol;
            ropts.max_basis = cfg.rom_max_basis;
            provider = std::make_unique<providers::RomProvider>(*fom, ropts);
        }

        InexactResult res = solve_inexact(*provider, *problem, x0, ledger, icfg);
        outcome.status = res.status;
        outcome.iterations = res.state.k;
        outcome.evals = res.state.eval_counts;
        x_final = res.state.x;
        lambda_final = res.state.lambda;
        for (const OuterRecord& r : res.outer_records) {
            HistoryRow row;
            row.k = r.k;
            row.model_fonc = r.model_stationarity;
            row.model_feas = r.model_feasibility;
            row.true_fonc = r.true_stationarity;
            row.merit = r.merit;
            row.rho = r.rho;
            row.alpha = r.alpha;
            row.fom_evals = r.evals.fom_total();
            row.rom_evals = r.evals.rom_solve;
            row.basis_size = r.basis_size;
            outcome.rows.push_back(row);
        }
    }

    // Final true-side report (mirrors the shape of the result tables).
    outcome.final_objective = problem->objective(x_final);
    const Vector c = problem->constraints(x_final);
    outcome.final_feasibility = c.lpNorm<1>();
    const Vector grad = problem->objective_gradient(x_final);
    const Matrix J = problem->constraint_jacobian(x_final);
    if (lambda_final.size() == J.rows()) {
        outcome.final_lagrangian_norm = (grad - J.transpose() * lambda_final).norm();
    } else {
        outcome.final_lagrangian_norm = grad.norm();
    }
    return outcome;
}

void write_summary(std::ostream& os, const RunOutcome& outcome) {
    os << "status: " << to_string(outcome.status) << "\n";
    os << "iterations: " << outcome.iterations << "\n";
    os << "fom_evals: " << outcome.evals.fom_total() << "\n";
    os << "rom_evals: " << outcome.evals.rom_solve << "\n";
    os << "final_objective: " << format_double(outcome.final_objective) << "\n";
    os << "final_constraint_violation: " << format_double(outcome.final_feasibility) << "\n";
    os << "final_lagrangian_gradient_norm: " << format_double(outcome.final_lagrangian_norm)
       << "\n";
}

}  // namespace

int run(const std::string& config_path, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = RunConfig::from_json_file(config_path);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }

    RunOutcome outcome;
    try {
        outcome = execute(cfg);
    } catch (const std::exception& e) {
        err << "solver failure: " << e.what() << "\n";
        return kExitSolverFailure;
    }

    write_history(cfg.history_path, cfg.effective_json(), outcome.rows);
    if (cfg.summary_path.empty()) {
        write_summary(out, outcome);
    } else {
        std::ofstream sfile(cfg.summary_path);
        if (!sfile) {
            err << "cannot open summary file: " << cfg.summary_path << "\n";
            return kExitSolverFailure;
        }
        write_summary(sfile, outcome);
    }

    if (outcome.status != SolveStatus::Converged) {
        err << "status: " << to_string(outcome.status) << "\n";
        return kExitSolverFailure;
    }
    return kExitOk;
}

int compare(const std::string& history_a, const std::string& history_b, std::ostream& out,
            std::ostream& err) {
    HistoryFile a, b;
    try {
        a = parse_history(history_a);
        b = parse_history(history_b);
    } catch (const ParseError& e) {
        err << "parse error at line " << e.line << ": " << e.what() << "\n";
        return kExitConfigError;
    }
    if (a.rows.empty() || b.rows.empty()) {
        err << "parse error at line 4: history contains no rows\n";
        return kExitConfigError;
    }

    const HistoryRow& fa = a.rows.back();
    const HistoryRow& fb = b.rows.back();
    auto emit = [&](const char* name, double va, double vb) {
        out << name << "," << format_double(va) << "," << format_double(vb) << ","
            << format_double(vb - va) << "\n";
    };
    out << "metric,run_a,run_b,delta\n";
    emit("iterations", static_cast<double>(fa.k), static_cast<double>(fb.k));
    emit("fom_evals", static_cast<double>(fa.fom_evals), static_cast<double>(fb.fom_evals));
    emit("rom_evals", static_cast<double>(fa.rom_evals), static_cast<double>(fb.rom_evals));
    emit("final_model_fonc", fa.model_fonc, fb.model_fonc);
    emit("final_model_feas", fa.model_feas, fb.model_feas);
    emit("final_true_fonc", fa.true_fonc, fb.true_fonc);
    if (fa.fom_evals < fb.fom_evals) {
        out << "fewer_fom_evals: run_a\n";
    } else if (fb.fom_evals < fa.fom_evals) {
        out << "fewer_fom_evals: run_b\n";
    } else {
        out << "fewer_fom_evals: tie\n";
    }
    return kExitOk;
}

}  // namespace tasqp::cli
