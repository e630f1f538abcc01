#pragma once

#include <string>
#include <vector>

#include "tasqp/errors.hpp"

namespace tasqp {

/// One comma-separated history row; column order is fixed and versioned
/// in the file header.
struct HistoryRow {
    long k = 0;
    double model_fonc = 0.0;
    double model_feas = 0.0;
    double true_fonc = 0.0;  // NaN when not instrumented
    double merit = 0.0;
    double rho = 0.0;
    double alpha = 0.0;
    long fom_evals = 0;
    long rom_evals = 0;
    long basis_size = 0;
};

struct HistoryFile {
    int version = 1;
    std::string config_json;
    std::vector<HistoryRow> rows;
};

/// 17-significant-digit text form (round-trips doubles exactly).
std::string format_double(double v);

void write_history(const std::string& path, const std::string& config_json,
                   const std::vector<HistoryRow>& rows);

/// Throws ParseError with the offending 1-based line number.
HistoryFile parse_history(const std::string& path);

}  // namespace tasqp
