#pragma once

// Monte-Carlo oracle for E[log(1 + P(t) t)] and E[P(t)], t = |h|^2.
//
// Samples are drawn by inverse-CDF from uniforms. The sample range is cut into
// chunks of `chunk` samples; chunk k draws from its own counter-based stream
// keyed by (seed, k), and chunk statistics are merged in index order, so the
// estimate does not depend on how many threads ran.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <variant>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "fadcap/allocation.hpp"
#include "fadcap/errors.hpp"
#include "fadcap/fading.hpp"
#include "fadcap/parallel.hpp"

namespace fadcap::mc {

struct McConfig {
    std::uint64_t samples = 10'000'000;
    std::uint64_t seed = 42;
    std::uint64_t chunk = 1u << 16;

    void validate() const {
        if (samples < 1000) throw DomainError("Monte Carlo needs at least 1000 samples");
        if (chunk == 0) throw DomainError("Monte Carlo chunk size must be positive");
    }
    std::uint64_t chunks() const { return (samples + chunk - 1) / chunk; }
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
    double max_value = -std::numeric_limits<double>::infinity();
};

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Counter-based generator: output i of stream k is a bijective mix of
/// key(seed, k) + i * golden.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_(splitmix64(seed ^ splitmix64(stream ^ 0xD1B54A32D192ED03ULL))) {}

    std::uint64_t next() noexcept { return splitmix64(key_ + 0x9E3779B97F4A7C15ULL * counter_++); }

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Inverse-CDF sampler for |h|^2.
///
/// Nakagami quantiles are costly to invert exactly, so they are read from a
/// cubic Hermite table of y = log F^-1(u) against x = logit(u), with exact
/// node derivatives dy/dx = u (1 - u) / (t f(t)). Uniforms outside the table
/// fall back to the exact inverse.
class GainSampler {
public:
    explicit GainSampler(FadingDistribution d) : dist_(std::move(d)) {
        if (const auto* n = std::get_if<Nakagami>(&dist_.kind())) build_table(*n);
    }

    double operator()(double u) const {
        if (!table_y_.empty()) {
            const double x = std::log(u / (1.0 - u));
            const double pos = (x - kXMin) / kStep;
            if (pos >= 0.0 && pos < static_cast<double>(table_y_.size() - 1)) {
                const auto i = static_cast<std::size_t>(pos);
                const double s = pos - static_cast<double>(i);
                const double s2 = s * s;
                const double s3 = s2 * s;
                const double y = (2.0 * s3 - 3.0 * s2 + 1.0) * table_y_[i] + (s3 - 2.0 * s2 + s) * kStep * table_dy_[i] +
                                 (-2.0 * s3 + 3.0 * s2) * table_y_[i + 1] + (s3 - s2) * kStep * table_dy_[i + 1];
                return std::exp(y);
            }
            return exact_nakagami(u);
        }
        return quantile(dist_, u);
    }

private:
    static constexpr double kXMin = -40.0;
    static constexpr double kXMax = 40.0;
    static constexpr double kStep = 1.0 / 128.0;

    double exact_nakagami(double u) const {
        const auto& n = std::get<Nakagami>(dist_.kind());
        const double z = u < 0.5 ? boost::math::gamma_p_inv(n.m, u) : boost::math::gamma_q_inv(n.m, 1.0 - u);
        return n.scale() * z;
    }

    void build_table(const Nakagami& n) {
        const auto count = static_cast<std::size_t>(std::lround((kXMax - kXMin) / kStep)) + 1;
        std::vector<double> y(count);
        std::vector<double> dy(count);
        for (std::size_t i = 0; i < count; ++i) {
            const double x = kXMin + kStep * static_cast<double>(i);
            const double u = 1.0 / (1.0 + std::exp(-x));
            const double v = 1.0 / (1.0 + std::exp(x));  // 1 - u without cancellation
            const double z = x < 0.0 ? boost::math::gamma_p_inv(n.m, u) : boost::math::gamma_q_inv(n.m, v);
            const double dens = boost::math::gamma_p_derivative(n.m, z);
            if (!(z > 0.0) || !(dens > 0.0) || !std::isfinite(z * dens)) return;  // keep exact path only
            y[i] = std::log(n.scale() * z);
            dy[i] = u * v / (z * dens);
        }
        table_y_ = std::move(y);
        table_dy_ = std::move(dy);
    }

    FadingDistribution dist_;
    std::vector<double> table_y_;
    std::vector<double> table_dy_;
};

namespace detail {

struct Moments {
    std::uint64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    double max = -std::numeric_limits<double>::infinity();

    void push(double x) noexcept {
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
        max = std::max(max, x);
    }

    void merge(const Moments& o) noexcept {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double total = static_cast<double>(n + o.n);
        const double delta = o.mean - mean;
        mean += delta * static_cast<double>(o.n) / total;
        m2 += o.m2 + delta * delta * static_cast<double>(n) * static_cast<double>(o.n) / total;
        n += o.n;
        max = std::max(max, o.max);
    }

    McEstimate finish() const noexcept {
        McEstimate e;
        e.mean = mean;
        e.samples = n;
        e.max_value = max;
        e.std_error = n > 1 ? std::sqrt(std::max(m2, 0.0) / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n))
                            : 0.0;
        return e;
    }
};

}  // namespace detail

struct RateAndPower {
    McEstimate rate;
    McEstimate power;
};

/// Rate and average power from a single pass over the same samples.
inline RateAndPower estimate_rate_and_power(const FadingDistribution& d, const PowerPolicy& policy,
                                            const McConfig& cfg) {
    cfg.validate();
    const GainSampler sample(d);
    const std::uint64_t chunks = cfg.chunks();
    std::vector<detail::Moments> rate(chunks);
    std::vector<detail::Moments> power(chunks);

    parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t k) {
        CounterRng rng(cfg.seed, k);
        const std::uint64_t begin = k * cfg.chunk;
        const std::uint64_t end = std::min(cfg.samples, begin + cfg.chunk);
        detail::Moments r;
        detail::Moments p;
        for (std::uint64_t i = begin; i < end; ++i) {
            const double t = sample(rng.uniform());
            const double P = power_at(policy, t);
            r.push(std::log1p(P * t));
            p.push(P);
        }
        rate[k] = r;
        power[k] = p;
    });

    detail::Moments r_all;
    detail::Moments p_all;
    for (std::uint64_t k = 0; k < chunks; ++k) {
        r_all.merge(rate[k]);
        p_all.merge(power[k]);
    }
    return RateAndPower{r_all.finish(), p_all.finish()};
}

inline McEstimate estimate_rate(const FadingDistribution& d, const PowerPolicy& policy, const McConfig& cfg) {
    return estimate_rate_and_power(d, policy, cfg).rate;
}

inline McEstimate estimate_avg_power(const FadingDistribution& d, const PowerPolicy& policy, const McConfig& cfg) {
    return estimate_rate_and_power(d, policy, cfg).power;
}

}  // namespace fadcap::mc
