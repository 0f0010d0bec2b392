#pragma once

// Distribution of the channel power gain |h|^2.
//
// Three families are supported:
//   Rayleigh   unit-mean exponential, f(t) = exp(-t)
//   Nakagami   Gamma(shape m, scale omega/m), so E[|h|^2] = omega
//   Tabulated  monotone cubic through (t, F(t)) samples, with an exponential
//              tail 1 - F(t) = S_n exp(-k (t - t_n)) beyond the last knot;
//              k is the least-squares slope of -log(1 - F) on the last three
//              knots.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "fadcap/errors.hpp"
#include "fadcap/monotone_cubic.hpp"
#include "fadcap/quadrature.hpp"

namespace fadcap {

struct Rayleigh {};

struct Nakagami {
    double m = 1.0;
    double omega = 1.0;

    double scale() const noexcept { return omega / m; }
};

class Tabulated {
public:
    Tabulated(std::vector<double> t, std::vector<double> F) {
        if (t.size() != F.size() || t.size() < 3) {
            throw DomainError("tabulated CDF needs at least three (t, F) pairs");
        }
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (!std::isfinite(t[i]) || !std::isfinite(F[i]) || t[i] < 0.0) {
                throw DomainError("tabulated CDF: entries must be finite with t >= 0");
            }
            if (i > 0 && !(t[i] > t[i - 1] && F[i] > F[i - 1])) {
                throw DomainError("tabulated CDF: t and F must be strictly increasing");
            }
        }
        if (!(F.front() >= 0.0 && F.back() < 1.0)) {
            throw DomainError("tabulated CDF: require 0 <= F(first) and F(last) < 1");
        }
        if (F.front() > 0.0) {
            if (t.front() == 0.0) {
                throw DomainError("tabulated CDF: F(0) > 0 would place an atom at zero gain");
            }
            t.insert(t.begin(), 0.0);
            F.insert(F.begin(), 0.0);
        }

        // Exponential tail fit on the last three knots.
        const std::size_t n = t.size();
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (std::size_t i = n - 3; i < n; ++i) {
            const double y = std::log1p(-F[i]);
            sx += t[i];
            sy += y;
            sxx += t[i] * t[i];
            sxy += t[i] * y;
        }
        const double slope = (3.0 * sxy - sx * sy) / (3.0 * sxx - sx * sx);
        tail_rate_ = -slope;
        if (!(tail_rate_ > 0.0) || !std::isfinite(tail_rate_)) {
            throw DomainError("tabulated CDF: exponential tail fit produced a non-positive rate");
        }
        tail_start_ = t.back();
        tail_mass_ = 1.0 - F.back();
        interp_ = MonotoneCubic(t, F, tail_rate_ * tail_mass_);
    }

    double support_lo() const noexcept { return interp_.front_x(); }
    double tail_start() const noexcept { return tail_start_; }
    double tail_rate() const noexcept { return tail_rate_; }
    double tail_mass() const noexcept { return tail_mass_; }
    const MonotoneCubic& interpolant() const noexcept { return interp_; }

private:
    MonotoneCubic interp_;
    double tail_start_ = 0.0;
    double tail_rate_ = 1.0;
    double tail_mass_ = 1.0;
};

/// Immutable description of the |h|^2 distribution.
class FadingDistribution {
public:
    using Kind = std::variant<Rayleigh, Nakagami, Tabulated>;

    static FadingDistribution rayleigh() { return FadingDistribution(Rayleigh{}); }

    static FadingDistribution nakagami(double m, double omega) {
        if (!(m > 0.0) || !(omega > 0.0) || !std::isfinite(m) || !std::isfinite(omega)) {
            throw DomainError("Nakagami parameters m and omega must be positive and finite");
        }
        return FadingDistribution(Nakagami{m, omega});
    }

    static FadingDistribution tabulated(std::vector<double> t, std::vector<double> F) {
        return FadingDistribution(Tabulated(std::move(t), std::move(F)));
    }

    const Kind& kind() const noexcept { return kind_; }
    bool is_rayleigh() const noexcept { return std::holds_alternative<Rayleigh>(kind_); }

    double support_lo() const noexcept {
        if (const auto* tab = std::get_if<Tabulated>(&kind_)) return tab->support_lo();
        return 0.0;
    }

    /// Abscissae where the density is only piecewise smooth.
    std::vector<double> breakpoints() const {
        if (const auto* tab = std::get_if<Tabulated>(&kind_)) {
            auto k = tab->interpolant().knots();
            return {k.begin(), k.end()};
        }
        return {};
    }

    std::string describe() const {
        return std::visit(
            [](const auto& k) -> std::string {
                using T = std::decay_t<decltype(k)>;
                std::ostringstream os;
                os.precision(17);
                if constexpr (std::is_same_v<T, Rayleigh>) {
                    os << "rayleigh";
                } else if constexpr (std::is_same_v<T, Nakagami>) {
                    os << "nakagami:m=" << k.m << ",omega=" << k.omega;
                } else {
                    os << "table(" << k.interpolant().size() << " knots)";
                }
                return os.str();
            },
            kind_);
    }

private:
    explicit FadingDistribution(Kind k) : kind_(std::move(k)) {}
    Kind kind_;
};

namespace detail {

inline void require_gain(double t, const char* op) {
    if (!std::isfinite(t)) throw DomainError(std::string(op) + ": gain must be finite");
    if (t < 0.0) throw DomainError(std::string(op) + ": gain must be nonnegative");
}

}  // namespace detail

/// Density of |h|^2 at t. For Nakagami with m < 1 the density is infinite at 0.
inline double pdf(const FadingDistribution& d, double t) {
    detail::require_gain(t, "pdf");
    return std::visit(
        [t](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Rayleigh>) {
                return std::exp(-t);
            } else if constexpr (std::is_same_v<T, Nakagami>) {
                const double x = t / k.scale();
                if (x == 0.0) {
                    if (k.m < 1.0) return std::numeric_limits<double>::infinity();
                    if (k.m > 1.0) return 0.0;
                    return 1.0 / k.scale();
                }
                return boost::math::gamma_p_derivative(k.m, x) / k.scale();
            } else {
                if (t < k.support_lo()) return 0.0;
                if (t >= k.tail_start()) {
                    return k.tail_rate() * k.tail_mass() * std::exp(-k.tail_rate() * (t - k.tail_start()));
                }
                return k.interpolant().derivative(t);
            }
        },
        d.kind());
}

/// P(|h|^2 > t), evaluated without forming 1 - cdf where a complement exists.
inline double tail_probability(const FadingDistribution& d, double t) {
    detail::require_gain(t, "tail_probability");
    return std::visit(
        [t](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Rayleigh>) {
                return std::exp(-t);
            } else if constexpr (std::is_same_v<T, Nakagami>) {
                return boost::math::gamma_q(k.m, t / k.scale());
            } else {
                if (t <= k.support_lo()) return 1.0;
                if (t >= k.tail_start()) {
                    return k.tail_mass() * std::exp(-k.tail_rate() * (t - k.tail_start()));
                }
                return 1.0 - k.interpolant()(t);
            }
        },
        d.kind());
}

inline double cdf(const FadingDistribution& d, double t) {
    detail::require_gain(t, "cdf");
    return std::visit(
        [t](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Rayleigh>) {
                return -std::expm1(-t);
            } else if constexpr (std::is_same_v<T, Nakagami>) {
                return boost::math::gamma_p(k.m, t / k.scale());
            } else {
                if (t <= k.support_lo()) return 0.0;
                if (t >= k.tail_start()) {
                    return 1.0 - k.tail_mass() * std::exp(-k.tail_rate() * (t - k.tail_start()));
                }
                return k.interpolant()(t);
            }
        },
        d.kind());
}

/// Smallest t with F(t) >= p, for p in [0, 1).
inline double quantile(const FadingDistribution& d, double p) {
    if (!(p >= 0.0 && p < 1.0)) {
        throw DomainError("quantile: probability must lie in [0, 1)");
    }
    if (p == 0.0) return d.support_lo();
    return std::visit(
        [p](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Rayleigh>) {
                return -std::log1p(-p);
            } else if constexpr (std::is_same_v<T, Nakagami>) {
                return k.scale() * boost::math::gamma_p_inv(k.m, p);
            } else {
                const double F_last = 1.0 - k.tail_mass();
                if (p >= F_last) {
                    return k.tail_start() + std::log(k.tail_mass() / (1.0 - p)) / k.tail_rate();
                }
                const auto& c = k.interpolant();
                auto ys = c.values();
                auto it = std::upper_bound(ys.begin(), ys.end(), p);
                const std::size_t i = static_cast<std::size_t>(it - ys.begin()) - 1;
                return c.invert_in_segment(i, p);
            }
        },
        d.kind());
}

/// Smallest t with P(|h|^2 > t) <= q, for q in (0, 1]. Equivalent to
/// quantile(1 - q) but keeps full precision when q is tiny.
inline double upper_quantile(const FadingDistribution& d, double q) {
    if (!(q > 0.0 && q <= 1.0)) {
        throw DomainError("upper_quantile: tail probability must lie in (0, 1]");
    }
    if (q == 1.0) return d.support_lo();
    return std::visit(
        [q, &d](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Rayleigh>) {
                return -std::log(q);
            } else if constexpr (std::is_same_v<T, Nakagami>) {
                return k.scale() * boost::math::gamma_q_inv(k.m, q);
            } else {
                if (q <= k.tail_mass()) {
                    return k.tail_start() + std::log(k.tail_mass() / q) / k.tail_rate();
                }
                return quantile(d, 1.0 - q);
            }
        },
        d.kind());
}

/// Integral of g(t) f(t) over [lo, hi] (hi may be +inf), split at the
/// distribution's breakpoints.
template <class G>
quad::IntegralEstimate partial_expectation(const FadingDistribution& d, G&& g, double lo, double hi,
                                           double rel_tol = 1e-10, double abs_tol = 0.0) {
    lo = std::max(lo, d.support_lo());
    if (!(lo < hi)) return quad::IntegralEstimate{0.0, 0.0, 1};
    auto integrand = [&](double t) {
        const double w = pdf(d, t);
        if (w == 0.0) return 0.0;
        return g(t) * w;
    };
    std::vector<double> cuts{lo};
    for (double b : d.breakpoints()) {
        if (b > lo && b < hi) cuts.push_back(b);
    }
    cuts.push_back(hi);

    quad::IntegralEstimate total;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        auto piece = quad::integrate(integrand, cuts[i], cuts[i + 1], rel_tol, abs_tol);
        total.value += piece.value;
        total.abs_error_estimate += piece.abs_error_estimate;
        total.evaluations += piece.evaluations;
    }
    return total;
}

/// Unnormalized partial expectation E[|h|^2; |h|^2 >= lo].
inline double tail_mean(const FadingDistribution& d, double lo) {
    detail::require_gain(lo, "tail_mean");
    return std::visit(
        [lo, &d](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Rayleigh>) {
                return (lo + 1.0) * std::exp(-lo);
            } else if constexpr (std::is_same_v<T, Nakagami>) {
                // t f_m(t) = omega f_{m+1}(t) for the gamma family
                return k.omega * boost::math::gamma_q(k.m + 1.0, lo / k.scale());
            } else {
                const double T0 = k.tail_start();
                const double from = std::max(lo, T0);
                const double tail = tail_probability(d, from) * (from + 1.0 / k.tail_rate());
                if (lo >= T0) return tail;
                auto body = partial_expectation(d, [](double t) { return t; }, lo, T0, 1e-13, 0.0);
                return body.value + tail;
            }
        },
        d.kind());
}

inline double mean(const FadingDistribution& d) { return tail_mean(d, 0.0); }

// ---------------------------------------------------------------------------
// Input formats

/// Reads "t F" pairs, one per line; '#' starts a comment.
inline FadingDistribution read_tabulated_cdf(std::istream& in, const std::string& source = "<stream>") {
    std::vector<double> t;
    std::vector<double> F;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        std::istringstream ls(line);
        double a = 0.0;
        double b = 0.0;
        if (!(ls >> a)) continue;  // blank line
        std::string extra;
        if (!(ls >> b) || (ls >> extra)) {
            throw ParseError(source + ":" + std::to_string(lineno) + ": expected two numbers \"t F\"");
        }
        t.push_back(a);
        F.push_back(b);
    }
    try {
        return FadingDistribution::tabulated(std::move(t), std::move(F));
    } catch (const DomainError& e) {
        throw ParseError(source + ": " + e.what());
    }
}

inline FadingDistribution load_tabulated_cdf(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open CDF table '" + path + "'");
    return read_tabulated_cdf(in, path);
}

/// Parses `rayleigh`, `nakagami:m=<m>,omega=<omega>` or `table:<path>`.
inline FadingDistribution parse_distribution(std::string_view spec) {
    if (spec == "rayleigh") return FadingDistribution::rayleigh();
    if (spec.starts_with("table:")) {
        return load_tabulated_cdf(std::string(spec.substr(6)));
    }
    if (spec.starts_with("nakagami:")) {
        double m = NAN;
        double omega = 1.0;
        std::string body(spec.substr(9));
        std::istringstream parts(body);
        std::string item;
        while (std::getline(parts, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw ParseError("nakagami spec: expected key=value, got '" + item + "'");
            const std::string key = item.substr(0, eq);
            const std::string val = item.substr(eq + 1);
            double v = 0.0;
            try {
                std::size_t used = 0;
                v = std::stod(val, &used);
                if (used != val.size()) throw std::invalid_argument(val);
            } catch (const std::exception&) {
                throw ParseError("nakagami spec: bad number '" + val + "'");
            }
            if (key == "m") {
                m = v;
            } else if (key == "omega") {
                omega = v;
            } else {
                throw ParseError("nakagami spec: unknown key '" + key + "'");
            }
        }
        if (std::isnan(m)) throw ParseError("nakagami spec: missing m");
        try {
            return FadingDistribution::nakagami(m, omega);
        } catch (const DomainError& e) {
            throw ParseError(e.what());
        }
    }
    throw ParseError("unknown distribution spec '" + std::string(spec) +
                     "' (expected rayleigh, nakagami:m=<m>,omega=<omega>, or table:<path>)");
}

}  // namespace fadcap
