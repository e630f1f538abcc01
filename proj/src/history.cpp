#include "tasqp/history.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace tasqp {

namespace {

constexpr const char* kMagic = "# tasqp-history v1";
constexpr const char* kColumns =
    "k,model_fonc,model_feas,true_fonc,merit,rho,alpha,fom_evals,rom_evals,basis_size";

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_history(const std::string& path, const std::string& config_json,
                   const std::vector<HistoryRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open history file for writing: " + path);
    out << kMagic << "\n";
    out << "# config " << config_json << "\n";
    out << kColumns << "\n";
    for (const HistoryRow& r : rows) {
        out << r.k << ',' << format_double(r.model_fonc) << ',' << format_double(r.model_feas)
            << ',' << format_double(r.true_fonc) << ',' << format_double(r.merit) << ','
            << format_double(r.rho) << ',' << format_double(r.alpha) << ',' << r.fom_evals << ','
            << r.rom_evals << ',' << r.basis_size << "\n";
    }
}

HistoryFile parse_history(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open history file: " + path, 0);

    HistoryFile file;
    std::string line;
    long line_no = 0;

    if (!std::getline(in, line)) throw ParseError("empty history file", 1);
    ++line_no;
    if (line != kMagic) throw ParseError("missing history magic line", line_no);

    if (!std::getline(in, line)) throw ParseError("missing config line", 2);
    ++line_no;
    const std::string config_prefix = "# config ";
    if (line.rfind(config_prefix, 0) != 0) throw ParseError("missing config line", line_no);
    file.config_json = line.substr(config_prefix.size());

    if (!std::getline(in, line)) throw ParseError("missing column header", 3);
    ++line_no;
    if (line != kColumns) throw ParseError("unexpected column header", line_no);

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string field;
        std::istringstream iss(line);
        while (std::getline(iss, field, ',')) fields.push_back(field);
        if (fields.size() != 10) throw ParseError("expected 10 comma-separated fields", line_no);

        auto as_double = [&](const std::string& s) {
            char* end = nullptr;
            const double v = std::strtod(s.c_str(), &end);
            if (end == s.c_str() || *end != '\0') {
                throw ParseError("malformed numeric field '" + s + "'", line_no);
            }
            return v;
        };
        auto as_long = [&](const std::string& s) {
            char* end = nullptr;
            const long v = std::strtol(s.c_str(), &end, 10);
            if (end == s.c_str() || *end != '\0') {
                throw ParseError("malformed integer field '" + s + "'", line_no);
            }
            return v;
        };

        HistoryRow row;
        row.k = as_long(fields[0]);
        row.model_fonc = as_double(fields[1]);
        row.model_feas = as_double(fields[2]);
        row.true_fonc = as_double(fields[3]);
        row.merit = as_double(fields[4]);
        row.rho = as_double(fields[5]);
        row.alpha = as_double(fields[6]);
        row.fom_evals = as_long(fields[7]);
        row.rom_evals = as_long(fields[8]);
        row.basis_size = as_long(fields[9]);
        file.rows.push_back(row);
    }
    return file;
}

}  // namespace tasqp
