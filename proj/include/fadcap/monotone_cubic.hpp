#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fadcap/errors.hpp"

namespace fadcap {

/// Shape-preserving piecewise cubic Hermite interpolant (Fritsch-Carlson)
/// through strictly increasing data. The interpolant is nondecreasing and C1.
class MonotoneCubic {
public:
    MonotoneCubic() = default;

    /// `right_slope`, when finite, overrides the one-sided end derivative at
    /// the last knot (clamped to keep the final segment monotone).
    MonotoneCubic(std::span<const double> x, std::span<const double> y, double right_slope = NAN)
        : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n) {
            throw DomainError("MonotoneCubic: need at least two knots with matching sizes");
        }
        std::vector<double> h(n - 1);
        std::vector<double> delta(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = x_[i + 1] - x_[i];
            delta[i] = (y_[i + 1] - y_[i]) / h[i];
            if (!(h[i] > 0.0) || !(delta[i] > 0.0)) {
                throw DomainError("MonotoneCubic: knots must be strictly increasing in both coordinates");
            }
        }

        d_.assign(n, 0.0);
        if (n == 2) {
            d_[0] = d_[1] = delta[0];
        } else {
            for (std::size_t i = 1; i + 1 < n; ++i) {
                // weighted harmonic mean; all secants are positive here
                const double w1 = 2.0 * h[i] + h[i - 1];
                const double w2 = h[i] + 2.0 * h[i - 1];
                d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
            d_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            d_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        if (std::isfinite(right_slope)) {
            d_[n - 1] = std::clamp(right_slope, 0.0, 3.0 * delta[n - 2]);
        }
    }

    std::size_t size() const noexcept { return x_.size(); }
    std::span<const double> knots() const noexcept { return x_; }
    std::span<const double> values() const noexcept { return y_; }
    double front_x() const noexcept { return x_.front(); }
    double back_x() const noexcept { return x_.back(); }

    /// Index i with x[i] <= x < x[i+1], clamped to valid segments.
    std::size_t segment(double x) const {
        auto it = std::upper_bound(x_.begin(), x_.end(), x);
        std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
        return std::min(i, x_.size() - 2);
    }

    double operator()(double x) const {
        const std::size_t i = segment(x);
        return eval(i, x);
    }

    double derivative(double x) const {
        const std::size_t i = segment(x);
        const double h = x_[i + 1] - x_[i];
        const double s = (x - x_[i]) / h;
        const double h00 = 6.0 * s * s - 6.0 * s;
        const double h10 = 3.0 * s * s - 4.0 * s + 1.0;
        const double h11 = 3.0 * s * s - 2.0 * s;
        // differences first: near-flat segments of a CDF close to 1 would
        // otherwise lose every digit to cancellation
        const double v = -h00 * (y_[i + 1] - y_[i]) / h + h10 * d_[i] + h11 * d_[i + 1];
        return std::max(v, 0.0);
    }

    /// Smallest x in segment i with value >= y (y within that segment's range).
    double invert_in_segment(std::size_t i, double y) const {
        double a = x_[i];
        double b = x_[i + 1];
        if (y <= y_[i]) return a;
        if (y >= y_[i + 1]) return b;
        // Newton steps safeguarded by bisection on a monotone function.
        double x = a + (b - a) * (y - y_[i]) / (y_[i + 1] - y_[i]);
        for (int iter = 0; iter < 100; ++iter) {
            const double fx = eval(i, x) - y;
            if (fx == 0.0) return x;
            if (fx < 0.0) a = x; else b = x;
            const double slope = derivative(x);
            double next = slope > 0.0 ? x - fx / slope : 0.5 * (a + b);
            if (!(next > a && next < b)) next = 0.5 * (a + b);
            if (std::abs(next - x) <= 4e-16 * std::max(std::abs(x), 1e-300) || b - a <= 4e-16 * std::abs(b)) {
                return next;
            }
            x = next;
        }
        return x;
    }

private:
    static double end_slope(double h0, double h1, double d0, double d1) {
        double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (d < 0.0) {
            d = 0.0;
        } else if (d > 3.0 * d0) {
            d = 3.0 * d0;
        }
        return d;
    }

    double eval(std::size_t i, double x) const {
        const double h = x_[i + 1] - x_[i];
        const double s = (x - x_[i]) / h;
        const double s2 = s * s;
        const double s3 = s2 * s;
        const double h10 = s3 - 2.0 * s2 + s;
        const double h01 = -2.0 * s3 + 3.0 * s2;
        const double h11 = s3 - s2;
        return y_[i] + h01 * (y_[i + 1] - y_[i]) + h * (h10 * d_[i] + h11 * d_[i + 1]);
    }

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> d_;
};

}  // namespace fadcap
