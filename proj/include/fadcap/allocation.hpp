#pragma once

// Power-allocation policies over the gain axis t = |h|^2:
//
//   water-filling         P(t) = [1/l0 - 1/t]^+
//   capped water-filling  P(t) = min([1/l - 1/t]^+, A snr)
//                         breakpoints l and alpha(l) = l / (1 - l A snr)
//   On-Off                P(t) = A snr for t >= F^-1(1 - 1/A), else 0
//
// Multipliers are chosen so the average power constraint E[P] = snr holds
// with equality.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string_view>
#include <utility>
#include <variant>

#include "fadcap/errors.hpp"
#include "fadcap/fading.hpp"
#include "fadcap/papr.hpp"
#include "fadcap/quadrature.hpp"

namespace fadcap {

struct PowerConstraints {
    double snr = 1.0;
    PaprSpec papr;

    PowerConstraints(double snr_linear, PaprSpec spec) : snr(snr_linear), papr(std::move(spec)) {
        if (!(snr > 0.0) || !std::isfinite(snr)) throw DomainError("SNR must be positive and finite");
    }

    /// PAPR value A at this SNR (infinite when unconstrained).
    double papr_value() const { return papr.at(snr); }
    double peak() const { return papr_value() * snr; }
};

struct WaterFillingPolicy {
    double lambda0;
};

struct CappedPolicy {
    double lambda;
    double alpha;
    double peak;
};

struct OnOffPolicy {
    double threshold;
    double level;
};

enum class PolicyKind { WaterFilling, CappedWaterFilling, OnOff };

inline std::string_view to_string(PolicyKind k) {
    switch (k) {
        case PolicyKind::WaterFilling: return "water-filling";
        case PolicyKind::CappedWaterFilling: return "capped-water-filling";
        case PolicyKind::OnOff: return "on-off";
    }
    return "?";
}

struct PowerPolicy {
    std::variant<WaterFillingPolicy, CappedPolicy, OnOffPolicy> shape;
    double snr = NAN;
    /// Peak allowed by the constraints; +inf when there is none.
    double peak_limit = std::numeric_limits<double>::infinity();
    double bracket_lo = NAN;
    double bracket_hi = NAN;
    /// E[P(|h|^2)] re-integrated after the solve.
    double achieved_power = NAN;

    PolicyKind kind() const noexcept { return static_cast<PolicyKind>(shape.index()); }
    bool cap_active() const noexcept { return kind() == PolicyKind::CappedWaterFilling; }

    /// l0 for water-filling, l for the capped policy, and the On-Off
    /// threshold (the l limit of the capped policy as snr -> 0).
    double multiplier() const noexcept {
        return std::visit(
            [](const auto& p) -> double {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, WaterFillingPolicy>) return p.lambda0;
                else if constexpr (std::is_same_v<T, CappedPolicy>) return p.lambda;
                else return p.threshold;
            },
            shape);
    }
};

inline double power_at(const PowerPolicy& policy, double t) {
    return std::visit(
        [t](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, WaterFillingPolicy>) {
                return t > p.lambda0 ? 1.0 / p.lambda0 - 1.0 / t : 0.0;
            } else if constexpr (std::is_same_v<T, CappedPolicy>) {
                if (t <= p.lambda) return 0.0;
                if (t >= p.alpha) return p.peak;
                return std::min(1.0 / p.lambda - 1.0 / t, p.peak);
            } else {
                return t >= p.threshold ? p.level : 0.0;
            }
        },
        policy.shape);
}

/// Policy value built from given breakpoints; used by oracles that solve the
/// multiplier some other way.
inline PowerPolicy make_capped_policy(double lambda, double peak) {
    PowerPolicy p;
    const double alpha = lambda * peak < 1.0 ? lambda / (1.0 - lambda * peak) : std::numeric_limits<double>::infinity();
    p.shape = CappedPolicy{lambda, alpha, peak};
    p.peak_limit = peak;
    return p;
}

namespace detail {

inline constexpr double kPowerRelTol = 1e-12;

/// E[[1/l0 - 1/t]^+].
inline double waterfilling_power(const FadingDistribution& d, double lambda0) {
    return partial_expectation(d, [lambda0](double t) { return (t - lambda0) / (lambda0 * t); }, lambda0,
                               std::numeric_limits<double>::infinity(), kPowerRelTol)
        .value;
}

inline double saturation_point(double lambda, double peak) {
    const double x = lambda * peak;
    return x < 1.0 ? lambda / (1.0 - x) : std::numeric_limits<double>::infinity();
}

/// E[min([1/l - 1/t]^+, peak)], split at the saturation point alpha(l).
inline double capped_power(const FadingDistribution& d, double lambda, double peak) {
    const double alpha = saturation_point(lambda, peak);
    // (t - l) / (l t) rather than 1/l - 1/t: the adaptive region can be
    // narrower than the rounding error of the difference
    const double adaptive =
        partial_expectation(d, [lambda](double t) { return (t - lambda) / (lambda * t); }, lambda, alpha, kPowerRelTol)
            .value;
    const double saturated = std::isfinite(alpha) ? peak * tail_probability(d, alpha) : 0.0;
    return adaptive + saturated;
}

inline double onoff_power(const FadingDistribution& d, double threshold, double level) {
    return level * tail_probability(d, threshold);
}

// Absolute bisection tolerance giving relative accuracy rel on a root near x.
inline double relative_root_tol(double rel, double x) { return rel * std::min(1.0, std::abs(x)); }

}  // namespace detail

/// Unconstrained water-filling. The multiplier bracket starts at l0 = 1 and is
/// doubled or halved until the power residual changes sign.
inline PowerPolicy solve_waterfilling(const FadingDistribution& d, double snr, double rel_tol = 1e-10) {
    if (!(snr > 0.0) || !std::isfinite(snr)) throw DomainError("solve_waterfilling: SNR must be positive and finite");
    auto residual = [&](double l) { return detail::waterfilling_power(d, l) - snr; };

    double lo = 1.0;
    double hi = 1.0;
    int steps = 0;
    if (residual(1.0) > 0.0) {
        do {
            lo = hi;
            hi *= 2.0;
            if (++steps > 200) throw SolverError("solve_waterfilling: bracket expansion failed after 200 doublings");
        } while (residual(hi) > 0.0);
    } else {
        do {
            hi = lo;
            lo *= 0.5;
            if (++steps > 200) throw SolverError("solve_waterfilling: bracket expansion failed after 200 halvings");
        } while (residual(lo) < 0.0);
    }

    const auto r = quad::find_root(residual, lo, hi, detail::relative_root_tol(rel_tol, hi));
    PowerPolicy p;
    p.shape = WaterFillingPolicy{r.root};
    p.snr = snr;
    p.bracket_lo = lo;
    p.bracket_hi = hi;
    p.achieved_power = detail::waterfilling_power(d, r.root);
    return p;
}

/// A(x) = 1 / E[[1 - x/t]^+], the PAPR water-filling would need if its
/// multiplier were x.
inline double papr_function(const FadingDistribution& d, double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("papr_function: x must be positive and finite");
    const double e = partial_expectation(d, [x](double t) { return (t - x) / t; }, x,
                                         std::numeric_limits<double>::infinity(), 1e-12)
                         .value;
    if (!(e > std::numeric_limits<double>::min())) {
        std::ostringstream msg;
        msg << "papr_function: E[[1 - x/t]^+] underflows at x = " << x;
        throw OverflowError(msg.str());
    }
    return 1.0 / e;
}

/// Interval [q / (1 + A snr q), q] with q = F^-1(1 - 1/A) that must contain
/// the capped multiplier.
inline std::pair<double, double> multiplier_bracket(const FadingDistribution& d, double snr, double A) {
    if (!(A >= 1.0) || !std::isfinite(A)) throw DomainError("multiplier_bracket: requires finite A >= 1");
    if (!(snr > 0.0)) throw DomainError("multiplier_bracket: SNR must be positive");
    const double q = upper_quantile(d, 1.0 / A);
    return {q / (1.0 + A * snr * q), q};
}

/// Transmit A snr whenever t >= F^-1(1 - 1/A), stay silent otherwise. With
/// A = 1 this is constant power over the whole support.
inline PowerPolicy onoff_policy(const FadingDistribution& d, const PowerConstraints& c) {
    if (c.papr.is_unconstrained()) throw DomainError("onoff_policy: requires a peak constraint");
    const double A = c.papr_value();
    const double threshold = upper_quantile(d, 1.0 / A);
    const double level = A * c.snr;
    PowerPolicy p;
    p.shape = OnOffPolicy{threshold, level};
    p.snr = c.snr;
    p.peak_limit = level;
    p.bracket_lo = p.bracket_hi = threshold;
    p.achieved_power = detail::onoff_power(d, threshold, level);
    return p;
}

/// Optimal policy under peak and average constraints.
///
/// When the unconstrained water-filling peak 1/l0 already fits under A snr the
/// water-filling policy is returned. A = 1 is returned as the constant-power
/// On-Off policy.
inline PowerPolicy solve_capped(const FadingDistribution& d, const PowerConstraints& c, double rel_tol = 1e-10) {
    if (c.papr.is_unconstrained()) throw DomainError("solve_capped: requires a peak constraint");
    const double snr = c.snr;
    const double A = c.papr_value();
    const double peak = A * snr;
    if (A == 1.0) return onoff_policy(d, c);

    // l0 >= 1/peak  <=>  E[[peak - 1/t]^+] >= snr
    if (detail::waterfilling_power(d, 1.0 / peak) >= snr) {
        PowerPolicy p = solve_waterfilling(d, snr, rel_tol);
        p.peak_limit = peak;
        return p;
    }

    const auto [lo0, hi0] = multiplier_bracket(d, snr, A);
    auto residual = [&](double l) { return detail::capped_power(d, l, peak) - snr; };

    // The bracket straddles the residual sign analytically; quantile rounding
    // can put an endpoint a hair on the wrong side.
    double lo = lo0;
    double hi = hi0;
    double r_lo = residual(lo);
    double r_hi = residual(hi);
    for (int widen = 0; widen < 8 && !(r_lo >= 0.0 && r_hi <= 0.0); ++widen) {
        const double pad = 1e-9 * std::ldexp(1.0, 2 * widen) * std::max(hi0, 1e-300);
        if (r_lo < 0.0) r_lo = residual(lo = std::max(lo0 - pad, 0.5 * lo0));
        if (r_hi > 0.0) r_hi = residual(hi = hi0 + pad);
    }
    if (!(r_lo >= 0.0 && r_hi <= 0.0)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "solve_capped: multiplier bracket [" << lo0 << ", " << hi0
            << "] does not straddle the power residual (" << r_lo << ", " << r_hi
            << "); the distribution primitives are inconsistent";
        throw SolverError(msg.str());
    }

    double lambda = hi;
    if (r_lo == 0.0) {
        lambda = lo;
    } else if (r_hi != 0.0 && hi > lo) {
        lambda = quad::find_root(residual, lo, hi, detail::relative_root_tol(rel_tol, hi)).root;
    }
    lambda = std::clamp(lambda, lo0, hi0);

    PowerPolicy p = make_capped_policy(lambda, peak);
    p.snr = snr;
    p.bracket_lo = lo0;
    p.bracket_hi = hi0;
    p.achieved_power = detail::capped_power(d, lambda, peak);
    return p;
}

}  // namespace fadcap
