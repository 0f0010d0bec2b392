#pragma once

// SNR sweeps and their CSV form.
//
// CSV layout: '#'-prefixed metadata lines, one header row, then one row per
// grid point in sweep order. Numbers are written with 17 significant digits
// so re-parsing reproduces every double exactly.

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fadcap/allocation.hpp"
#include "fadcap/capacity.hpp"
#include "fadcap/errors.hpp"
#include "fadcap/fading.hpp"
#include "fadcap/papr.hpp"
#include "fadcap/parallel.hpp"
#include "fadcap/version.hpp"

namespace fadcap {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double snr) { return 10.0 * std::log10(snr); }

/// `points` values spaced linearly in dB from start to stop (either order).
inline std::vector<double> db_grid(double start_db, double stop_db, std::size_t points) {
    if (points < 2) throw DomainError("SNR grid needs at least two points");
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i) {
        g[i] = start_db + (stop_db - start_db) * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    return g;
}

inline const std::vector<std::string>& sweep_columns() {
    static const std::vector<std::string> cols = {
        "snr_db",        "snr",       "papr", "lambda", "capacity_exact", "rate_onoff", "capacity_asymptotic",
        "capacity_wf_unconstrained", "energy_per_nat"};
    return cols;
}

struct SweepConfig {
    std::string dist = "rayleigh";
    std::string papr = "const:2";
    double snr_db_start = -50.0;
    double snr_db_stop = 0.0;
    std::size_t points = 51;
    std::vector<std::string> columns = sweep_columns();
};

/// One evaluated operating point.
struct OperatingPoint {
    double snr_db = NAN;
    double snr = NAN;
    double papr = NAN;
    double lambda = NAN;
    double capacity_exact = NAN;
    double rate_onoff = NAN;
    double capacity_asymptotic = NAN;
    double capacity_wf_unconstrained = NAN;
    double energy_per_nat = NAN;
    bool cap_active = false;
    double bracket_lo = NAN;
    double bracket_hi = NAN;

    double column(const std::string& name) const {
        if (name == "snr_db") return snr_db;
        if (name == "snr") return snr;
        if (name == "papr") return papr;
        if (name == "lambda") return lambda;
        if (name == "capacity_exact") return capacity_exact;
        if (name == "rate_onoff") return rate_onoff;
        if (name == "capacity_asymptotic") return capacity_asymptotic;
        if (name == "capacity_wf_unconstrained") return capacity_wf_unconstrained;
        if (name == "energy_per_nat") return energy_per_nat;
        throw ParseError("unknown column '" + name + "'");
    }
};

/// Low-SNR prediction used for the capacity_asymptotic column: the fixed-A
/// tail-mean law for constant PAPR, snr * ln A(snr) for profiles on Rayleigh.
inline double asymptotic_prediction(const FadingDistribution& d, const PaprSpec& papr, double snr) {
    if (papr.is_unconstrained()) return NAN;
    const double A = papr.at(snr);
    if (papr.is_profile() && d.is_rayleigh()) return snr * std::log(A);
    return low_snr_capacity(d, A, snr);
}

inline OperatingPoint evaluate_point(const FadingDistribution& d, const PaprSpec& papr, double snr_db) {
    OperatingPoint p;
    p.snr_db = snr_db;
    p.snr = db_to_linear(snr_db);
    const auto wf = solve_waterfilling(d, p.snr);
    p.capacity_wf_unconstrained = capacity_of(d, wf).value;
    if (papr.is_unconstrained()) {
        p.papr = std::numeric_limits<double>::infinity();
        p.lambda = wf.multiplier();
        p.capacity_exact = p.capacity_wf_unconstrained;
    } else {
        const PowerConstraints c(p.snr, papr);
        p.papr = c.papr_value();
        const auto policy = solve_capped(d, c);
        p.lambda = policy.multiplier();
        p.cap_active = policy.cap_active();
        p.bracket_lo = policy.bracket_lo;
        p.bracket_hi = policy.bracket_hi;
        p.capacity_exact = capacity_of(d, policy).value;
        p.rate_onoff = rate_onoff(d, c).value;
    }
    p.capacity_asymptotic = asymptotic_prediction(d, papr, p.snr);
    p.energy_per_nat = p.snr / p.capacity_exact;
    return p;
}

/// Evaluates the grid, possibly in parallel; rows come back in grid order.
inline std::vector<OperatingPoint> run_sweep(const FadingDistribution& d, const PaprSpec& papr,
                                             const std::vector<double>& snr_db) {
    return parallel_map(snr_db, [&](double db) { return evaluate_point(d, papr, db); });
}

inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

inline void write_sweep_csv(std::ostream& out, const SweepConfig& cfg, const std::vector<OperatingPoint>& rows) {
    for (const auto& c : cfg.columns) (void)OperatingPoint{}.column(c);  // validates names
    out << "# " << kToolName << " " << kVersion << "\n";
    out << "# command=sweep\n";
    out << "# dist=" << cfg.dist << "\n";
    out << "# papr=" << cfg.papr << "\n";
    out << "# snr_db_start=" << format_number(cfg.snr_db_start) << "\n";
    out << "# snr_db_stop=" << format_number(cfg.snr_db_stop) << "\n";
    out << "# points=" << cfg.points << "\n";
    for (std::size_t i = 0; i < cfg.columns.size(); ++i) out << (i ? "," : "") << cfg.columns[i];
    out << "\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < cfg.columns.size(); ++i) {
            out << (i ? "," : "") << format_number(r.column(cfg.columns[i]));
        }
        out << "\n";
    }
}

/// Parsed CSV: metadata key/values, header and numeric rows.
struct CsvTable {
    std::map<std::string, std::string> metadata;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t index_of(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw ParseError("CSV has no column '" + name + "'");
    }
};

inline CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        return cells;
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq != std::string::npos) t.metadata[line.substr(2, eq - 2)] = line.substr(eq + 1);
            continue;
        }
        if (t.header.empty()) {
            t.header = split(line);
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != t.header.size()) throw ParseError("CSV row width does not match header");
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            char* end = nullptr;
            const double v = std::strtod(c.c_str(), &end);
            if (end == c.c_str() || *end != '\0') throw ParseError("CSV: bad number '" + c + "'");
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace fadcap
