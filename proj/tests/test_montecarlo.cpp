#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include "fadcap/capacity.hpp"
#include "fadcap/errors.hpp"
#include "fadcap/montecarlo.hpp"
#include "oracles.hpp"

using namespace fadcap;

namespace {

PowerConstraints constant(double snr, double A) { return PowerConstraints(snr, PaprSpec::constant(A)); }

PowerPolicy flat(double level) {
    PowerPolicy p;
    p.shape = OnOffPolicy{0.0, level};
    return p;
}

mc::McConfig config(std::uint64_t samples, std::uint64_t seed = 42) {
    mc::McConfig c;
    c.samples = samples;
    c.seed = seed;
    return c;
}

class ThreadEnv {
public:
    explicit ThreadEnv(const char* n) {
        if (const char* old = std::getenv("FADCAP_THREADS")) saved_ = old;
        setenv("FADCAP_THREADS", n, 1);
    }
    ~ThreadEnv() {
        if (saved_.empty()) unsetenv("FADCAP_THREADS"); else setenv("FADCAP_THREADS", saved_.c_str(), 1);
    }

private:
    std::string saved_;
};

}  // namespace

TEST(MonteCarlo, ZeroPolicy) {
    const auto e = mc::estimate_rate(FadingDistribution::rayleigh(), flat(0.0), config(5000));
    EXPECT_EQ(e.mean, 0.0);
    EXPECT_EQ(e.std_error, 0.0);
    EXPECT_EQ(e.samples, 5000u);
}

TEST(MonteCarlo, ConstantPolicyPower) {
    const auto e = mc::estimate_avg_power(FadingDistribution::nakagami(0.5, 1.0), flat(0.37), config(5000));
    EXPECT_EQ(e.mean, 0.37);
    EXPECT_EQ(e.std_error, 0.0);
}

TEST(MonteCarlo, RejectsTooFewSamples) {
    EXPECT_THROW(mc::estimate_rate(FadingDistribution::rayleigh(), flat(1.0), config(10)), DomainError);
    auto c = config(5000);
    c.chunk = 0;
    EXPECT_THROW(mc::estimate_rate(FadingDistribution::rayleigh(), flat(1.0), c), DomainError);
}

TEST(MonteCarlo, RayleighOnOffAgreesWithQuadrature) {
    const auto d = FadingDistribution::rayleigh();
    const auto c = constant(1e-2, 2.0);
    const auto policy = onoff_policy(d, c);
    const auto est = mc::estimate_rate_and_power(d, policy, config(10000000));
    EXPECT_LE(std::abs(est.rate.mean - rate_onoff(d, c).value), 3.0 * est.rate.std_error);
    EXPECT_LE(std::abs(est.power.mean - 1e-2), 3.0 * est.power.std_error);
}

TEST(MonteCarlo, RayleighCappedAgreesWithQuadrature) {
    const auto d = FadingDistribution::rayleigh();
    const auto c = constant(1e-3, 2.0);
    const auto policy = solve_capped(d, c);
    const auto est = mc::estimate_rate_and_power(d, policy, config(10000000));
    EXPECT_LE(std::abs(est.rate.mean - capacity_of(d, policy).value), 3.0 * est.rate.std_error);
    EXPECT_LE(std::abs(est.power.mean - 1e-3), 3.0 * est.power.std_error);
    EXPECT_LE(est.power.max_value, 2e-3 + 1e-12);
}

TEST(MonteCarlo, OnOffDutyCycleIsBinomial) {
    // the fraction of samples above ln 2 is Binomial(n, 1/2) / n
    const auto d = FadingDistribution::rayleigh();
    const double snr = 0.25;
    const std::uint64_t n = 1000000;
    const auto e = mc::estimate_avg_power(d, onoff_policy(d, constant(snr, 2.0)), config(n, 3));
    const double expected_se = 2.0 * snr * 0.5 / std::sqrt(static_cast<double>(n));
    EXPECT_NEAR(e.std_error / expected_se, 1.0, 1e-3);
    EXPECT_LE(std::abs(e.mean - snr), 3.0 * e.std_error);
}

TEST(MonteCarlo, DeterministicAcrossThreadCounts) {
    const auto d = FadingDistribution::nakagami(0.5, 1.0);
    const auto policy = solve_capped(d, constant(1e-2, 3.0));
    auto c = config(300000, 11);
    c.chunk = 4096;
    mc::RateAndPower one;
    mc::RateAndPower four;
    {
        ThreadEnv env("1");
        one = mc::estimate_rate_and_power(d, policy, c);
    }
    {
        ThreadEnv env("4");
        four = mc::estimate_rate_and_power(d, policy, c);
    }
    EXPECT_EQ(one.rate.mean, four.rate.mean);
    EXPECT_EQ(one.rate.std_error, four.rate.std_error);
    EXPECT_EQ(one.power.mean, four.power.mean);
    const auto again = mc::estimate_rate_and_power(d, policy, c);
    EXPECT_EQ(one.rate.mean, again.rate.mean);
}

TEST(MonteCarlo, StandardErrorHalvesWithFourTimesTheSamples) {
    const auto d = FadingDistribution::rayleigh();
    const auto policy = solve_capped(d, constant(1e-2, 2.0));
    const auto small = mc::estimate_rate(d, policy, config(250000, 8));
    const auto large = mc::estimate_rate(d, policy, config(1000000, 9));
    const double factor = small.std_error / large.std_error;
    EXPECT_GE(factor, 1.6);
    EXPECT_LE(factor, 2.4);
}

TEST(MonteCarlo, UniformsAreOpenAndStreamsDiffer) {
    mc::CounterRng a(1, 0);
    mc::CounterRng b(1, 1);
    int same = 0;
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = a.uniform();
        const double v = b.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        same += (u == v);
        sum += u;
    }
    EXPECT_EQ(same, 0);
    EXPECT_NEAR(sum / 100000.0, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / 100000.0));
}

TEST(GainSampler, NakagamiTableMatchesExactInverse) {
    for (double m : {0.5, 1.7, 4.0}) {
        const auto d = FadingDistribution::nakagami(m, 1.3);
        const mc::GainSampler sample(d);
        mc::CounterRng rng(77, 0);
        double worst = 0.0;
        for (int i = 0; i < 20000; ++i) {
            const double u = rng.uniform();
            const double exact = u < 0.5 ? quantile(d, u) : upper_quantile(d, 1.0 - u);
            worst = std::max(worst, std::abs(sample(u) / exact - 1.0));
        }
        EXPECT_LT(worst, 1e-9) << "m=" << m;
        for (double u : {1e-6, 0.25, 0.5, 0.9}) {
            EXPECT_NEAR(sample(u) / oracle::nakagami_gain_quantile(m, 1.3, u), 1.0, 1e-9) << "m=" << m << " u=" << u;
        }
    }
}

TEST(GainSampler, RayleighIsExactInverse) {
    const mc::GainSampler sample(FadingDistribution::rayleigh());
    for (double u : {1e-9, 0.1, 0.5, 0.999}) EXPECT_NEAR(sample(u), -std::log1p(-u), 1e-14 * (1.0 - std::log1p(-u)));
}
