#pragma once

// Adaptive Gauss-Kronrod integration and bracketed root finding.
//
// Semi-infinite ranges [lo, +inf) are mapped onto [0, 1) with
// t = lo + u / (1 - u), dt = du / (1 - u)^2. The Kronrod rule never samples
// the endpoint u = 1, so integrands only need to decay fast enough for the
// mapped integrand to stay integrable.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <vector>

#include "fadcap/errors.hpp"

namespace fadcap::quad {

struct IntegralEstimate {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    std::size_t evaluations = 0;
};

struct RootResult {
    double root = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    double residual = 0.0;
    std::size_t iterations = 0;
};

struct IntegrationOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-14;
    std::size_t max_intervals = 10000;
};

namespace detail {

// 15-point Kronrod abscissae and weights with the embedded 7-point Gauss rule.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a;
    double b;
    double value;
    double error;
    bool splittable;
};

template <class F>
Segment gk15(F& f, double a, double b) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double abs_half = std::abs(half);

    std::array<double, 7> f1{};
    std::array<double, 7> f2{};
    const double fc = f(center);
    double result_gauss = fc * kWg[3];
    double result_kronrod = fc * kWgk[7];
    double result_abs = std::abs(result_kronrod);

    for (int j = 0; j < 3; ++j) {
        const int jtw = 2 * j + 1;
        const double dx = half * kXgk[jtw];
        const double v1 = f(center - dx);
        const double v2 = f(center + dx);
        f1[jtw] = v1;
        f2[jtw] = v2;
        result_gauss += kWg[j] * (v1 + v2);
        result_kronrod += kWgk[jtw] * (v1 + v2);
        result_abs += kWgk[jtw] * (std::abs(v1) + std::abs(v2));
    }
    for (int j = 0; j < 4; ++j) {
        const int jtwm1 = 2 * j;
        const double dx = half * kXgk[jtwm1];
        const double v1 = f(center - dx);
        const double v2 = f(center + dx);
        f1[jtwm1] = v1;
        f2[jtwm1] = v2;
        result_kronrod += kWgk[jtwm1] * (v1 + v2);
        result_abs += kWgk[jtwm1] * (std::abs(v1) + std::abs(v2));
    }

    const double mean = result_kronrod * 0.5;
    double result_asc = kWgk[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j) {
        result_asc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
    }

    double err = std::abs((result_kronrod - result_gauss) * half);
    result_asc *= abs_half;
    result_abs *= abs_half;
    if (result_asc != 0.0 && err != 0.0) {
        err = result_asc * std::min(1.0, std::pow(200.0 * err / result_asc, 1.5));
    }
    if (result_abs > std::numeric_limits<double>::min() / (50.0 * eps)) {
        err = std::max(50.0 * eps * result_abs, err);
    }

    // Stop splitting once the midpoint can no longer be separated from the
    // endpoints in floating point.
    const double scale = std::max(std::abs(a), std::abs(b));
    const bool splittable = (b - a) > 1e3 * eps * std::max(scale, std::numeric_limits<double>::min());
    return Segment{a, b, result_kronrod * half, err, splittable};
}

template <class F>
IntegralEstimate adaptive(F& f, double a, double b, const IntegrationOptions& opt) {
    auto by_error = [](const Segment& x, const Segment& y) { return x.error < y.error; };
    std::vector<Segment> heap;
    std::vector<Segment> frozen;
    heap.reserve(64);
    heap.push_back(gk15(f, a, b));
    std::size_t evaluations = 15;

    double total = heap.front().value;
    double total_err = heap.front().error;

    auto done = [&] { return total_err <= std::max(opt.rel_tol * std::abs(total), opt.abs_tol); };

    while (!done()) {
        if (heap.empty()) break;  // everything left is at roundoff resolution
        if (heap.size() + frozen.size() >= opt.max_intervals) {
            std::ostringstream msg;
            msg << "integrate: subdivision budget of " << opt.max_intervals
                << " intervals exhausted on [" << a << ", " << b << "] (estimate " << total
                << ", error " << total_err << ")";
            throw ConvergenceError(msg.str(), total, total_err);
        }
        std::pop_heap(heap.begin(), heap.end(), by_error);
        Segment worst = heap.back();
        heap.pop_back();
        if (!worst.splittable) {
            frozen.push_back(worst);
            continue;
        }
        const double mid = 0.5 * (worst.a + worst.b);
        Segment left = gk15(f, worst.a, mid);
        Segment right = gk15(f, mid, worst.b);
        evaluations += 30;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end(), by_error);
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end(), by_error);
    }

    // Re-sum in interval order so the result does not depend on the running
    // update history.
    heap.insert(heap.end(), frozen.begin(), frozen.end());
    std::sort(heap.begin(), heap.end(), [](const Segment& x, const Segment& y) { return x.a < y.a; });
    IntegralEstimate out;
    for (const auto& s : heap) {
        out.value += s.value;
        out.abs_error_estimate += s.error;
    }
    out.evaluations = evaluations;
    return out;
}

}  // namespace detail

/// Integrates f over [lo, hi]; hi may be +infinity.
///
/// Converges when the summed local error estimate falls below
/// max(rel_tol * |value|, abs_tol). Throws ConvergenceError (carrying the
/// partial estimate) if the subdivision budget is exhausted first.
template <class F>
IntegralEstimate integrate(F&& f, double lo, double hi, const IntegrationOptions& opt) {
    if (!std::isfinite(lo) || std::isnan(hi)) {
        throw DomainError("integrate: lower limit must be finite");
    }
    if (!(lo < hi)) {
        if (lo == hi) return IntegralEstimate{0.0, 0.0, 1};
        throw DomainError("integrate: requires lo < hi");
    }
    if (!(opt.rel_tol > 0.0) || opt.abs_tol < 0.0) {
        throw DomainError("integrate: tolerances must be positive");
    }
    if (std::isinf(hi)) {
        auto mapped = [&f, lo](double u) {
            const double one_minus = 1.0 - u;
            const double t = lo + u / one_minus;
            const double v = f(t);
            if (v == 0.0) return 0.0;  // avoids inf * 0 far in the tail
            return v / (one_minus * one_minus);
        };
        return detail::adaptive(mapped, 0.0, 1.0, opt);
    }
    return detail::adaptive(f, lo, hi, opt);
}

template <class F>
IntegralEstimate integrate(F&& f, double lo, double hi, double rel_tol = 1e-8, double abs_tol = 1e-14) {
    IntegrationOptions opt;
    opt.rel_tol = rel_tol;
    opt.abs_tol = abs_tol;
    return integrate(std::forward<F>(f), lo, hi, opt);
}

/// Bisection root finder for a continuous monotone g on [lo, hi].
///
/// Terminates when the bracket is narrower than rel_tol * max(|lo|, |hi|, 1).
/// Endpoints that are exact roots are returned directly.
template <class G>
RootResult find_root(G&& g, double lo, double hi, double rel_tol = 1e-10) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo <= hi)) {
        throw DomainError("find_root: bracket must be finite with lo <= hi");
    }
    auto eval = [&g](double x) {
        const double v = g(x);
        if (std::isnan(v)) {
            std::ostringstream msg;
            msg << "find_root: g(" << x << ") is NaN";
            throw DomainError(msg.str());
        }
        return v;
    };
    double g_lo = eval(lo);
    if (g_lo == 0.0) return RootResult{lo, lo, hi, 0.0, 0};
    const double g_hi = eval(hi);
    if (g_hi == 0.0) return RootResult{hi, lo, hi, 0.0, 0};
    if (std::signbit(g_lo) == std::signbit(g_hi)) {
        std::ostringstream msg;
        msg << "find_root: g has the same sign at both ends of [" << lo << ", " << hi << "] ("
            << g_lo << ", " << g_hi << ")";
        throw BracketError(msg.str());
    }

    const double tol = rel_tol * std::max({std::abs(lo), std::abs(hi), 1.0});
    double a = lo;
    double b = hi;
    std::size_t iterations = 0;
    while (b - a > tol) {
        const double mid = a + 0.5 * (b - a);
        if (mid <= a || mid >= b) break;
        const double g_mid = eval(mid);
        ++iterations;
        if (g_mid == 0.0) {
            a = b = mid;
            break;
        }
        if (std::signbit(g_mid) == std::signbit(g_lo)) {
            a = mid;
            g_lo = g_mid;
        } else {
            b = mid;
        }
    }
    const double root = a + 0.5 * (b - a);
    return RootResult{root, lo, hi, eval(root), iterations};
}

}  // namespace fadcap::quad
