#pragma once

// Ergodic capacities, achievable rates and low-SNR asymptotic laws.
//
// All values are in nats per channel use.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fadcap/allocation.hpp"
#include "fadcap/errors.hpp"
#include "fadcap/fading.hpp"
#include "fadcap/papr.hpp"
#include "fadcap/parallel.hpp"

namespace fadcap {

struct CapacityResult {
    double value = 0.0;
    double multiplier = NAN;
    double integration_error = 0.0;
    PolicyKind policy_kind = PolicyKind::WaterFilling;
};

/// Two-piece split of the capped capacity: the power-adaptive region
/// [l, alpha) and the saturated region [alpha, inf).
struct CappedCapacityTerms {
    double adaptive = 0.0;
    double saturated = 0.0;
    double integration_error = 0.0;

    double total() const noexcept { return adaptive + saturated; }
};

inline constexpr double kCapacityRelTol = 1e-10;

/// E[log(1 + P(t) t)] for the given policy, split into the adaptive and
/// saturated parts.
inline CappedCapacityTerms capacity_terms(const FadingDistribution& d, const PowerPolicy& policy,
                                          double rel_tol = kCapacityRelTol) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    CappedCapacityTerms out;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, WaterFillingPolicy>) {
                const double l0 = p.lambda0;
                auto r = partial_expectation(d, [l0](double t) { return std::log1p((t - l0) / l0); }, l0, inf, rel_tol);
                out.adaptive = r.value;
                out.integration_error = r.abs_error_estimate;
            } else if constexpr (std::is_same_v<T, CappedPolicy>) {
                const double l = p.lambda;
                const double peak = p.peak;
                auto a = partial_expectation(d, [l](double t) { return std::log1p((t - l) / l); }, l, p.alpha, rel_tol);
                auto s = partial_expectation(d, [peak](double t) { return std::log1p(peak * t); }, p.alpha, inf,
                                             rel_tol);
                out.adaptive = a.value;
                out.saturated = s.value;
                out.integration_error = a.abs_error_estimate + s.abs_error_estimate;
            } else {
                const double level = p.level;
                auto r = partial_expectation(d, [level](double t) { return std::log1p(level * t); }, p.threshold,
                                             inf, rel_tol);
                out.saturated = r.value;
                out.integration_error = r.abs_error_estimate;
            }
        },
        policy.shape);
    return out;
}

inline CapacityResult capacity_of(const FadingDistribution& d, const PowerPolicy& policy,
                                  double rel_tol = kCapacityRelTol) {
    const auto terms = capacity_terms(d, policy, rel_tol);
    return CapacityResult{std::max(terms.total(), 0.0), policy.multiplier(), terms.integration_error,
                          policy.kind()};
}

/// Capacity with an average power constraint only.
inline CapacityResult capacity_waterfilling(const FadingDistribution& d, double snr) {
    return capacity_of(d, solve_waterfilling(d, snr));
}

/// Capacity with peak and average power constraints.
inline CapacityResult capacity_capped(const FadingDistribution& d, const PowerConstraints& c) {
    return capacity_of(d, solve_capped(d, c));
}

/// Rate of the On-Off scheme (one bit of transmitter CSI per realization).
inline CapacityResult rate_onoff(const FadingDistribution& d, const PowerConstraints& c) {
    return capacity_of(d, onoff_policy(d, c));
}

/// Constant-power rate E[log(1 + snr t)].
inline double constant_power_rate(const FadingDistribution& d, double snr, double rel_tol = kCapacityRelTol) {
    return partial_expectation(d, [snr](double t) { return std::log1p(snr * t); }, d.support_lo(),
                               std::numeric_limits<double>::infinity(), rel_tol)
        .value;
}

// ---------------------------------------------------------------------------
// Fixed-A low-SNR law: C ~ A snr * integral_{1-1/A}^{1} F^-1(u) du
//                         = A snr * E[|h|^2; |h|^2 >= F^-1(1 - 1/A)]

struct LowSnrLawForms {
    double quantile_form = 0.0;   ///< A snr * integral of the quantile
    double tail_mean_form = 0.0;  ///< A snr * tail_mean(F^-1(1 - 1/A))
};

inline LowSnrLawForms low_snr_law_forms(const FadingDistribution& d, double A, double snr) {
    if (!(A >= 1.0) || !std::isfinite(A)) throw DomainError("low-SNR law: requires finite A >= 1");
    if (!(snr > 0.0)) throw DomainError("low-SNR law: SNR must be positive");
    const double q = upper_quantile(d, 1.0 / A);
    LowSnrLawForms f;
    f.tail_mean_form = A * snr * tail_mean(d, q);
    // substitute u = 1 - v so the log-singular end sits at v = 0
    const double integral =
        quad::integrate([&d](double v) { return upper_quantile(d, v); }, 0.0, 1.0 / A, 1e-10, 0.0).value;
    f.quantile_form = A * snr * integral;
    return f;
}

/// Fixed-A asymptotic capacity. Both algebraic forms are evaluated and must
/// agree to 1e-6 relative.
inline double low_snr_capacity(const FadingDistribution& d, double A, double snr) {
    const auto f = low_snr_law_forms(d, A, snr);
    if (std::abs(f.quantile_form - f.tail_mean_form) > 1e-6 * std::abs(f.tail_mean_form)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "asymptotic law: quantile form " << f.quantile_form << " and tail-mean form " << f.tail_mean_form
            << " disagree";
        throw SolverError(msg.str());
    }
    return f.tail_mean_form;
}

struct EnergyEfficiency {
    /// Noise-normalized energy per nat, snr / C.
    double energy_per_nat = NAN;
    /// Low-SNR limit 1 / (A * integral_{1-1/A}^{1} F^-1(u) du).
    double asymptotic_limit = NAN;
};

inline EnergyEfficiency energy_per_nat(const FadingDistribution& d, double A, double snr_eval) {
    if (!(snr_eval > 0.0)) throw DomainError("energy_per_nat: SNR must be positive");
    const auto C = capacity_capped(d, PowerConstraints(snr_eval, PaprSpec::constant(A)));
    if (!(C.value > 0.0)) throw DomainError("energy_per_nat: capacity is zero");
    EnergyEfficiency e;
    e.energy_per_nat = snr_eval / C.value;
    e.asymptotic_limit = 1.0 / (A * tail_mean(d, upper_quantile(d, 1.0 / A)));
    return e;
}

// ---------------------------------------------------------------------------
// Ratio probes for "f ~ g as snr -> 0" claims

struct RatioPoint {
    double snr;
    double ratio;
};

/// exact(snr) / predicted(snr) over a strictly decreasing positive grid.
inline std::vector<RatioPoint> asymptotic_ratio_probe(const std::function<double(double)>& exact,
                                                      const std::function<double(double)>& predicted,
                                                      const std::vector<double>& snr_grid) {
    for (std::size_t i = 0; i < snr_grid.size(); ++i) {
        if (!(snr_grid[i] > 0.0) || (i > 0 && !(snr_grid[i] < snr_grid[i - 1]))) {
            throw DomainError("ratio probe: SNR grid must be positive and strictly decreasing");
        }
    }
    return parallel_map(snr_grid, [&](double s) {
        const double p = predicted(s);
        if (p == 0.0) {
            std::ostringstream msg;
            msg << "ratio probe: predicted value is zero at snr = " << s;
            throw DomainError(msg.str());
        }
        return RatioPoint{s, exact(s) / p};
    });
}

struct ConvergenceCheck {
    double final_deviation = NAN;  ///< |ratio - 1| at the smallest snr
    bool within_bound = false;
    bool nonincreasing = false;    ///< |ratio - 1| over the trailing points

    bool holds() const noexcept { return within_bound && nonincreasing; }
};

/// Accepts a ratio sequence when |ratio - 1| at the last point is below
/// `bound` and |ratio - 1| does not increase over the last `trailing` points.
inline ConvergenceCheck check_ratio_convergence(const std::vector<RatioPoint>& probe, double bound,
                                                std::size_t trailing = 3) {
    ConvergenceCheck c;
    if (probe.empty()) return c;
    c.final_deviation = std::abs(probe.back().ratio - 1.0);
    c.within_bound = c.final_deviation < bound;
    c.nonincreasing = true;
    const std::size_t first = probe.size() > trailing ? probe.size() - trailing : 0;
    for (std::size_t i = first + 1; i < probe.size(); ++i) {
        if (std::abs(probe[i].ratio - 1.0) > std::abs(probe[i - 1].ratio - 1.0)) c.nonincreasing = false;
    }
    return c;
}

// ---------------------------------------------------------------------------
// Variable PAPR on Rayleigh fading

enum class Regime { L0Positive, L0Zero };

inline std::string_view to_string(Regime r) { return r == Regime::L0Positive ? "L0_POSITIVE" : "L0_ZERO"; }

/// Width alpha(l) - l of the power-adaptive region,
/// l^2 A snr / (1 - l A snr), at the capped optimum.
inline double l_of_snr(const FadingDistribution& d, const PaprSpec& profile, double snr) {
    if (!d.is_rayleigh()) throw ScopeError("adaptive-region width is only defined here for Rayleigh fading");
    if (profile.is_unconstrained()) throw ScopeError("adaptive-region width needs a peak constraint");
    const PowerConstraints c(snr, profile);
    const auto policy = solve_capped(d, c);
    if (!policy.cap_active()) {
        std::ostringstream msg;
        msg.precision(6);
        msg << "peak constraint " << profile.to_string() << " is inactive at snr = " << snr;
        throw ScopeError(msg.str());
    }
    const auto& p = std::get<CappedPolicy>(policy.shape);
    const double x = p.lambda * p.peak;
    return p.lambda * x / (1.0 - x);
}

struct RegimeOptions {
    /// l below this value and still falling over the trailing decades means l0 = 0.
    double l0_threshold = 0.1;
    /// Number of trailing decades used for the trend.
    double trend_decades = 3.0;
};

struct RegimeRow {
    double snr;
    double papr;
    double lambda;
    double l;
    double exact;
    double predicted;
    double ratio;
    double unified_predicted;  ///< snr * ln A(snr)
    double unified_ratio;
};

struct RegimeReport {
    std::vector<double> snr_grid;
    std::vector<double> l_values;
    double l0_estimate = NAN;
    Regime regime = Regime::L0Zero;
    std::string predicted_law;
    std::vector<RegimeRow> ratio_table;
    double l0_threshold = 0.1;
    /// Admissibility screens that were run, in order.
    std::vector<std::string> screening;
};

/// Classifies a variable PAPR profile on Rayleigh fading by the trend of
/// l(snr) over the trailing decades of a decreasing grid, and tabulates the
/// capped capacity against the matching low-SNR law.
inline RegimeReport classify_regime(const FadingDistribution& d, const PaprSpec& profile,
                                    const std::vector<double>& snr_grid, const RegimeOptions& opt = {}) {
    if (!d.is_rayleigh()) {
        throw ScopeError("regime classification is restricted to Rayleigh fading (got " + d.describe() + ")");
    }
    if (profile.is_constant()) {
        throw ScopeError("PAPR " + profile.to_string() +
                         " is bounded; use the fixed-A law C ~ A snr E[|h|^2; |h|^2 >= F^-1(1 - 1/A)] "
                         "(capacity/sweep commands) instead");
    }
    if (profile.is_unconstrained()) throw ScopeError("regime classification needs a PAPR profile");
    if (snr_grid.size() < 2) throw DomainError("regime classification: need at least two grid points");
    for (std::size_t i = 0; i < snr_grid.size(); ++i) {
        if (!(snr_grid[i] > 0.0) || (i > 0 && !(snr_grid[i] < snr_grid[i - 1]))) {
            throw DomainError("regime classification: SNR grid must be positive and strictly decreasing");
        }
    }
    if (std::log10(snr_grid.front() / snr_grid.back()) < 4.0 - 1e-9) {
        throw DomainError("regime classification: SNR grid must span at least four decades");
    }

    RegimeReport rep;
    rep.snr_grid = snr_grid;
    rep.l0_threshold = opt.l0_threshold;
    const std::size_t n = snr_grid.size();

    std::vector<double> A(n);
    for (std::size_t i = 0; i < n; ++i) A[i] = profile.at(snr_grid[i]);
    for (std::size_t i = 1; i < n; ++i) {
        if (!(A[i] * snr_grid[i] < A[i - 1] * snr_grid[i - 1])) {
            throw InadmissibleProfile("profile " + profile.to_string() +
                                      " violates A(SNR)*SNR -> 0: the peak power does not decrease along the grid");
        }
    }
    rep.screening.push_back("A(SNR)*SNR -> 0: ok");
    for (std::size_t i = 1; i < n; ++i) {
        if (!(A[i] > A[i - 1])) {
            throw InadmissibleProfile("profile " + profile.to_string() +
                                      " does not grow as SNR -> 0 (A(SNR) bounded); use the fixed-A law");
        }
    }
    rep.screening.push_back("A(SNR) -> inf: ok");

    struct Point {
        PowerPolicy policy;
        double exact;
    };
    std::vector<Point> pts(n);
    parallel_for(n, [&](std::size_t i) {
        const PowerConstraints c(snr_grid[i], profile);
        auto pol = solve_capped(d, c);
        const double C = pol.cap_active() ? capacity_of(d, pol).value : NAN;
        pts[i] = Point{std::move(pol), C};
    });

    for (std::size_t i = 0; i < n; ++i) {
        if (!pts[i].policy.cap_active()) {
            std::ostringstream msg;
            msg.precision(6);
            msg << "profile " << profile.to_string() << " violates A(SNR)*SNR < 1/lambda0: peak constraint inactive at snr = "
                << snr_grid[i];
            throw InadmissibleProfile(msg.str());
        }
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(pts[i].policy.multiplier() > pts[i - 1].policy.multiplier())) {
            throw InadmissibleProfile("profile " + profile.to_string() +
                                      " violates lambda -> inf as A(SNR) -> inf: multiplier does not grow along the grid");
        }
    }
    rep.screening.push_back("lambda -> inf: ok");

    rep.l_values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = std::get<CappedPolicy>(pts[i].policy.shape);
        const double x = p.lambda * p.peak;
        rep.l_values[i] = p.lambda * x / (1.0 - x);
    }

    // trend over the trailing decades
    const double cutoff = snr_grid.back() * std::pow(10.0, opt.trend_decades) * (1.0 + 1e-9);
    std::size_t first = n - 1;
    while (first > 0 && snr_grid[first - 1] <= cutoff) --first;
    bool falling = true;
    bool rising = true;
    for (std::size_t i = first + 1; i < n; ++i) {
        if (rep.l_values[i] > rep.l_values[i - 1]) falling = false;
        if (rep.l_values[i] < rep.l_values[i - 1]) rising = false;
    }
    const double l_last = rep.l_values.back();
    if (l_last < opt.l0_threshold && falling) {
        rep.regime = Regime::L0Zero;
        rep.l0_estimate = 0.0;
        rep.predicted_law = "C ~ snr * ln(A(snr))";
    } else {
        rep.regime = Regime::L0Positive;
        rep.l0_estimate = rising && first + 1 < n ? std::numeric_limits<double>::infinity() : l_last;
        rep.predicted_law = "C ~ snr * ln(1/snr)";
    }

    rep.ratio_table.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = snr_grid[i];
        const double unified = s * std::log(A[i]);
        const double predicted = rep.regime == Regime::L0Zero ? unified : s * std::log(1.0 / s);
        rep.ratio_table.push_back(RegimeRow{s, A[i], pts[i].policy.multiplier(), rep.l_values[i], pts[i].exact,
                                            predicted, pts[i].exact / predicted, unified, pts[i].exact / unified});
    }
    return rep;
}

}  // namespace fadcap
