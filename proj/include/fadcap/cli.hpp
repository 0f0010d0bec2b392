#pragma once

// Command-line front end.
//
// Subcommands: capacity, sweep, onoff, verify, regime.
// Exit codes: 0 success, 1 computation or verification failure, 2 usage error.
//
// `--config FILE` reads `key = value` lines (keys are long option names
// without dashes). Values from the file are applied first, so flags given on
// the command line win.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fadcap/allocation.hpp"
#include "fadcap/capacity.hpp"
#include "fadcap/errors.hpp"
#include "fadcap/fading.hpp"
#include "fadcap/montecarlo.hpp"
#include "fadcap/papr.hpp"
#include "fadcap/sweep.hpp"
#include "fadcap/version.hpp"

namespace fadcap::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::vector<std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    std::vector<std::string> args;
    std::string line;
    std::size_t lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
        }
        args.push_back("--" + trim(line.substr(0, eq)));
        args.push_back(trim(line.substr(eq + 1)));
    }
    return args;
}

/// Splices `--config` file entries in right after the subcommand name.
inline std::vector<std::string> expand_config(std::vector<std::string> args,
                                              const std::vector<std::string>& subcommands) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config requires a path");
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (path.empty()) return args;
    const auto extra = read_config_file(path);
    auto sub = std::find_if(args.begin(), args.end(), [&](const std::string& a) {
        return std::find(subcommands.begin(), subcommands.end(), a) != subcommands.end();
    });
    if (sub == args.end()) throw UsageError("--config needs a subcommand");
    args.insert(sub + 1, extra.begin(), extra.end());
    return args;
}

struct Common {
    std::string dist = "rayleigh";
    std::string papr = "const:2";
};

inline void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--dist", c.dist, "rayleigh | nakagami:m=<m>,omega=<omega> | table:<path>")
        ->capture_default_str();
    sub->add_option("--papr", c.papr, "const:<A> | log-inv | power-law:<a>,<b> | near-wf:<c> | none")
        ->capture_default_str();
}

inline void kv(std::ostream& out, const std::string& key, double v) { out << key << "=" << format_number(v) << "\n"; }
inline void kv(std::ostream& out, const std::string& key, const std::string& v) { out << key << "=" << v << "\n"; }

inline double z_score(double mc_mean, double mc_se, double reference) {
    const double diff = mc_mean - reference;
    if (mc_se > 0.0) return diff / mc_se;
    return diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
}

// ---------------------------------------------------------------------------

struct CapacityArgs {
    Common common;
    double snr_db = 0.0;
};

inline int cmd_capacity(const CapacityArgs& a, std::ostream& out) {
    const auto dist = parse_distribution(a.common.dist);
    const auto papr = parse_papr(a.common.papr);
    const auto p = evaluate_point(dist, papr, a.snr_db);
    kv(out, "snr_db", p.snr_db);
    kv(out, "snr", p.snr);
    kv(out, "A", p.papr);
    kv(out, "policy", papr.is_unconstrained() ? "water-filling"
                                              : std::string(to_string(solve_capped(dist, PowerConstraints(p.snr, papr)).kind())));
    kv(out, "lambda", p.lambda);
    kv(out, "capacity_exact", p.capacity_exact);
    kv(out, "rate_onoff", p.rate_onoff);
    kv(out, "capacity_asymptotic", p.capacity_asymptotic);
    kv(out, "capacity_wf_unconstrained", p.capacity_wf_unconstrained);
    kv(out, "energy_per_nat", p.energy_per_nat);
    bool ok = p.capacity_exact <= p.capacity_wf_unconstrained + 1e-9;
    if (!papr.is_unconstrained()) ok = ok && p.rate_onoff <= p.capacity_exact + 1e-9;
    kv(out, "invariants", ok ? "ok" : "violated");
    return ok ? kExitOk : kExitFailure;
}

struct SweepArgs {
    Common common;
    double snr_db_start = -50.0;
    double snr_db_stop = 0.0;
    std::size_t points = 51;
    std::string columns;
    std::string output = "-";
};

inline SweepConfig to_config(const SweepArgs& a) {
    SweepConfig cfg;
    cfg.dist = a.common.dist;
    cfg.papr = a.common.papr;
    cfg.snr_db_start = a.snr_db_start;
    cfg.snr_db_stop = a.snr_db_stop;
    cfg.points = a.points;
    if (!a.columns.empty()) {
        cfg.columns.clear();
        std::stringstream ss(a.columns);
        std::string col;
        while (std::getline(ss, col, ',')) {
            if (std::find(sweep_columns().begin(), sweep_columns().end(), col) == sweep_columns().end()) {
                throw UsageError("unknown column '" + col + "'");
            }
            cfg.columns.push_back(col);
        }
    }
    return cfg;
}

/// Writes the sweep CSV for `cfg` to `out`.
inline void write_sweep(const SweepConfig& cfg, std::ostream& out) {
    const auto dist = parse_distribution(cfg.dist);
    const auto papr = parse_papr(cfg.papr);
    const auto rows = run_sweep(dist, papr, db_grid(cfg.snr_db_start, cfg.snr_db_stop, cfg.points));
    write_sweep_csv(out, cfg, rows);
}

inline int cmd_sweep(const SweepArgs& a, std::ostream& out) {
    const auto cfg = to_config(a);
    if (a.output == "-") {
        write_sweep(cfg, out);
        return kExitOk;
    }
    std::ostringstream buffer;
    write_sweep(cfg, buffer);
    std::ofstream file(a.output);
    if (!file) throw std::runtime_error("cannot write '" + a.output + "'");
    file << buffer.str();
    file.close();
    if (!file) throw std::runtime_error("write to '" + a.output + "' failed");
    return kExitOk;
}

struct OnOffArgs {
    Common common;
    double snr_db = 0.0;
};

inline int cmd_onoff(const OnOffArgs& a, std::ostream& out) {
    const auto dist = parse_distribution(a.common.dist);
    const auto papr = parse_papr(a.common.papr);
    if (papr.is_unconstrained()) throw UsageError("onoff needs a PAPR constraint");
    const PowerConstraints c(db_to_linear(a.snr_db), papr);
    const auto policy = onoff_policy(dist, c);
    const auto& shape = std::get<OnOffPolicy>(policy.shape);
    const double rate = capacity_of(dist, policy).value;
    const double exact = capacity_capped(dist, c).value;
    kv(out, "snr_db", a.snr_db);
    kv(out, "snr", c.snr);
    kv(out, "A", c.papr_value());
    kv(out, "threshold", shape.threshold);
    kv(out, "level", shape.level);
    kv(out, "on_probability", tail_probability(dist, shape.threshold));
    kv(out, "average_power", policy.achieved_power);
    kv(out, "rate_onoff", rate);
    kv(out, "capacity_exact", exact);
    kv(out, "ratio", rate / exact);
    return rate <= exact + 1e-9 ? kExitOk : kExitFailure;
}

struct VerifyArgs {
    Common common;
    double snr_db = -20.0;
    std::uint64_t samples = 10'000'000;
    std::uint64_t seed = 42;
    std::uint64_t chunk = 1u << 16;
    std::string policy = "capped";
};

inline int cmd_verify(const VerifyArgs& a, std::ostream& out) {
    const auto dist = parse_distribution(a.common.dist);
    const auto papr = parse_papr(a.common.papr);
    if (papr.is_unconstrained()) throw UsageError("verify needs a PAPR constraint");
    const PowerConstraints c(db_to_linear(a.snr_db), papr);
    const auto policy = a.policy == "onoff" ? onoff_policy(dist, c) : solve_capped(dist, c);
    const double quad_rate = capacity_of(dist, policy).value;
    mc::McConfig cfg;
    cfg.samples = a.samples;
    cfg.seed = a.seed;
    cfg.chunk = a.chunk;
    const auto est = mc::estimate_rate_and_power(dist, policy, cfg);
    const double z_rate = z_score(est.rate.mean, est.rate.std_error, quad_rate);
    const double z_power = z_score(est.power.mean, est.power.std_error, policy.achieved_power);
    kv(out, "policy", std::string(to_string(policy.kind())));
    kv(out, "snr", c.snr);
    kv(out, "samples", static_cast<double>(est.rate.samples));
    kv(out, "rate_quadrature", quad_rate);
    kv(out, "rate_mc_mean", est.rate.mean);
    kv(out, "rate_mc_se", est.rate.std_error);
    kv(out, "rate_z", z_rate);
    kv(out, "power_quadrature", policy.achieved_power);
    kv(out, "power_mc_mean", est.power.mean);
    kv(out, "power_mc_se", est.power.std_error);
    kv(out, "power_z", z_power);
    const bool ok = std::abs(z_rate) <= 3.0 && std::abs(z_power) <= 3.0;
    kv(out, "verdict", ok ? "agree" : "disagree");
    return ok ? kExitOk : kExitFailure;
}

struct RegimeArgs {
    Common common;
    double snr_db_start = -40.0;
    double snr_db_stop = -80.0;
    std::size_t points = 9;
    double threshold = 0.1;
    std::string output = "-";
};

inline int cmd_regime(const RegimeArgs& a, std::ostream& out) {
    const auto dist = parse_distribution(a.common.dist);
    const auto papr = parse_papr(a.common.papr);
    std::vector<double> grid;
    for (double db : db_grid(a.snr_db_start, a.snr_db_stop, a.points)) grid.push_back(db_to_linear(db));
    RegimeOptions opt;
    opt.l0_threshold = a.threshold;
    const auto rep = classify_regime(dist, papr, grid, opt);

    for (const auto& s : rep.screening) out << "screen: " << s << "\n";
    for (std::size_t i = 0; i < rep.snr_grid.size(); ++i) {
        out << "l(snr=" << format_number(rep.snr_grid[i]) << ")=" << format_number(rep.l_values[i]) << "\n";
    }
    kv(out, "l0_threshold", rep.l0_threshold);
    kv(out, "l0_estimate", rep.l0_estimate);
    kv(out, "regime", std::string(to_string(rep.regime)));
    kv(out, "predicted_law", rep.predicted_law);

    std::ostringstream csv;
    csv << "# " << kToolName << " " << kVersion << "\n# command=regime\n# dist=" << a.common.dist
        << "\n# papr=" << a.common.papr << "\n# regime=" << to_string(rep.regime) << "\n";
    csv << "snr,papr,lambda,l,capacity_exact,predicted,ratio,unified_predicted,unified_ratio\n";
    for (const auto& r : rep.ratio_table) {
        csv << format_number(r.snr) << "," << format_number(r.papr) << "," << format_number(r.lambda) << ","
            << format_number(r.l) << "," << format_number(r.exact) << "," << format_number(r.predicted) << ","
            << format_number(r.ratio) << "," << format_number(r.unified_predicted) << ","
            << format_number(r.unified_ratio) << "\n";
    }
    if (a.output == "-") {
        out << "\n" << csv.str();
    } else {
        std::ofstream file(a.output);
        if (!file || !(file << csv.str())) throw std::runtime_error("cannot write '" + a.output + "'");
    }
    return kExitOk;
}

}  // namespace detail

/// Runs the CLI on `args` (without the program name).
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ergodic capacity of fading channels under peak and average power constraints", kToolName};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);
    std::string config_path;
    app.add_option("--config", config_path, "key = value file; command-line flags override it");

    detail::CapacityArgs cap;
    auto* c_cap = app.add_subcommand("capacity", "Evaluate one operating point");
    detail::add_common(c_cap, cap.common);
    c_cap->add_option("--snr-db", cap.snr_db, "average SNR in dB")->required();

    detail::SweepArgs sw;
    auto* c_sw = app.add_subcommand("sweep", "Sweep SNR on a dB grid and write CSV");
    detail::add_common(c_sw, sw.common);
    c_sw->add_option("--snr-db-start", sw.snr_db_start)->capture_default_str();
    c_sw->add_option("--snr-db-stop", sw.snr_db_stop)->capture_default_str();
    c_sw->add_option("--points", sw.points)->check(CLI::Range(std::size_t{2}, std::size_t{1000000}))->capture_default_str();
    c_sw->add_option("--columns", sw.columns, "comma-separated subset of output columns");
    c_sw->add_option("--output,-o", sw.output, "output path, '-' for stdout")->capture_default_str();

    detail::OnOffArgs oo;
    auto* c_oo = app.add_subcommand("onoff", "On-Off scheme at one operating point");
    detail::add_common(c_oo, oo.common);
    c_oo->add_option("--snr-db", oo.snr_db)->required();

    detail::VerifyArgs ver;
    auto* c_ver = app.add_subcommand("verify", "Cross-check quadrature against Monte Carlo");
    detail::add_common(c_ver, ver.common);
    c_ver->add_option("--snr-db", ver.snr_db)->capture_default_str();
    c_ver->add_option("--samples", ver.samples)
        ->check(CLI::Range(std::uint64_t{1000}, std::numeric_limits<std::uint64_t>::max()))
        ->capture_default_str();
    c_ver->add_option("--seed", ver.seed)->capture_default_str();
    c_ver->add_option("--chunk", ver.chunk)
        ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()))
        ->capture_default_str();
    c_ver->add_option("--policy", ver.policy)->check(CLI::IsMember({"capped", "onoff"}))->capture_default_str();

    detail::RegimeArgs reg;
    reg.common.papr = "log-inv";
    auto* c_reg = app.add_subcommand("regime", "Classify a variable PAPR profile (Rayleigh only)");
    detail::add_common(c_reg, reg.common);
    c_reg->add_option("--snr-db-start", reg.snr_db_start)->capture_default_str();
    c_reg->add_option("--snr-db-stop", reg.snr_db_stop)->capture_default_str();
    c_reg->add_option("--points", reg.points)->check(CLI::Range(std::size_t{2}, std::size_t{100000}))->capture_default_str();
    c_reg->add_option("--threshold", reg.threshold, "l0 = 0 threshold")->capture_default_str();
    c_reg->add_option("--output,-o", reg.output, "ratio table CSV path, '-' for stdout")->capture_default_str();

    try {
        args = detail::expand_config(std::move(args), {"capacity", "sweep", "onoff", "verify", "regime"});
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kToolName << " " << kVersion << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const detail::UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (c_cap->parsed()) return detail::cmd_capacity(cap, out);
        if (c_sw->parsed()) return detail::cmd_sweep(sw, out);
        if (c_oo->parsed()) return detail::cmd_onoff(oo, out);
        if (c_ver->parsed()) return detail::cmd_verify(ver, out);
        if (c_reg->parsed()) return detail::cmd_regime(reg, out);
    } catch (const detail::UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ScopeError& e) {
        err << "scope error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InadmissibleProfile& e) {
        err << "inadmissible profile: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "computation failed: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace fadcap::cli
