#pragma once

#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>

#include "fadcap/errors.hpp"

namespace fadcap {

/// Fixed peak-to-average ratio A >= 1.
struct ConstantPapr {
    double A = 1.0;
};

/// A(SNR) = ln(e + 1/SNR).
struct LogInversePapr {};

/// A(SNR) = a * SNR^(-b), 0 < b < 1.
struct PowerLawPapr {
    double a = 1.0;
    double b = 0.5;
};

/// A(SNR) = 1 / (SNR * ln(1/SNR)^c), c > 1. Sits between
/// (1/SNR) / ln(1/SNR)^2 and (1/SNR) / ln(1/SNR) for 1 < c < 2.
struct NearWaterFillingPapr {
    double c = 1.5;
};

/// No peak constraint.
struct UnconstrainedPapr {};

class PaprSpec {
public:
    using Variant = std::variant<ConstantPapr, LogInversePapr, PowerLawPapr, NearWaterFillingPapr, UnconstrainedPapr>;

    PaprSpec() : v_(UnconstrainedPapr{}) {}

    static PaprSpec constant(double A) {
        if (!(A >= 1.0) || !std::isfinite(A)) throw DomainError("constant PAPR requires finite A >= 1");
        return PaprSpec(ConstantPapr{A});
    }
    static PaprSpec log_inverse() { return PaprSpec(LogInversePapr{}); }
    static PaprSpec power_law(double a, double b) {
        if (!(a > 0.0) || !(b > 0.0 && b < 1.0)) throw DomainError("power-law PAPR requires a > 0 and 0 < b < 1");
        return PaprSpec(PowerLawPapr{a, b});
    }
    static PaprSpec near_waterfilling(double c) {
        if (!(c > 1.0) || !std::isfinite(c)) throw DomainError("near-wf PAPR requires c > 1");
        return PaprSpec(NearWaterFillingPapr{c});
    }
    static PaprSpec unconstrained() { return PaprSpec(UnconstrainedPapr{}); }

    const Variant& variant() const noexcept { return v_; }
    bool is_constant() const noexcept { return std::holds_alternative<ConstantPapr>(v_); }
    bool is_unconstrained() const noexcept { return std::holds_alternative<UnconstrainedPapr>(v_); }
    /// True for SNR-dependent profiles.
    bool is_profile() const noexcept { return !is_constant() && !is_unconstrained(); }

    /// A at the given linear SNR. Throws DomainError if the profile is
    /// undefined there or drops below 1.
    double at(double snr) const {
        if (!(snr > 0.0) || !std::isfinite(snr)) throw DomainError("PAPR: SNR must be positive and finite");
        const double A = std::visit(
            [snr](const auto& p) -> double {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, ConstantPapr>) {
                    return p.A;
                } else if constexpr (std::is_same_v<T, LogInversePapr>) {
                    return std::log(std::numbers::e + 1.0 / snr);
                } else if constexpr (std::is_same_v<T, PowerLawPapr>) {
                    return p.a * std::pow(snr, -p.b);
                } else if constexpr (std::is_same_v<T, NearWaterFillingPapr>) {
                    if (!(snr < 1.0)) throw DomainError("near-wf PAPR is only defined for SNR < 1");
                    return 1.0 / (snr * std::pow(std::log(1.0 / snr), p.c));
                } else {
                    return std::numeric_limits<double>::infinity();
                }
            },
            v_);
        if (!(A >= 1.0)) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "PAPR profile " << to_string() << " gives A = " << A << " < 1 at SNR = " << snr;
            throw DomainError(msg.str());
        }
        return A;
    }

    std::string to_string() const {
        std::ostringstream os;
        std::visit(
            [&os](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, ConstantPapr>) {
                    os << "const:" << shortest(p.A);
                } else if constexpr (std::is_same_v<T, LogInversePapr>) {
                    os << "log-inv";
                } else if constexpr (std::is_same_v<T, PowerLawPapr>) {
                    os << "power-law:" << shortest(p.a) << "," << shortest(p.b);
                } else if constexpr (std::is_same_v<T, NearWaterFillingPapr>) {
                    os << "near-wf:" << shortest(p.c);
                } else {
                    os << "none";
                }
            },
            v_);
        return os.str();
    }

private:
    /// Shortest text that parses back to the same double.
    static std::string shortest(double v) {
        char buf[32];
        const auto r = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, r.ptr);
    }

    explicit PaprSpec(Variant v) : v_(std::move(v)) {}
    Variant v_;
};

namespace detail {

inline double parse_number(std::string_view text, std::string_view what) {
    const std::string s(text);
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ParseError(std::string(what) + ": bad number '" + s + "'");
}

}  // namespace detail

/// Parses `const:<A>`, `log-inv`, `power-law:<a>,<b>`, `near-wf:<c>`, `none`.
inline PaprSpec parse_papr(std::string_view spec) {
    try {
        if (spec == "log-inv") return PaprSpec::log_inverse();
        if (spec == "none") return PaprSpec::unconstrained();
        if (spec.starts_with("const:")) {
            return PaprSpec::constant(detail::parse_number(spec.substr(6), "const PAPR"));
        }
        if (spec.starts_with("near-wf:")) {
            return PaprSpec::near_waterfilling(detail::parse_number(spec.substr(8), "near-wf PAPR"));
        }
        if (spec.starts_with("power-law:")) {
            const auto body = spec.substr(10);
            const auto comma = body.find(',');
            if (comma == std::string_view::npos) throw ParseError("power-law PAPR: expected <a>,<b>");
            return PaprSpec::power_law(detail::parse_number(body.substr(0, comma), "power-law PAPR"),
                                       detail::parse_number(body.substr(comma + 1), "power-law PAPR"));
        }
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
    throw ParseError("unknown PAPR spec '" + std::string(spec) +
                     "' (expected const:<A>, log-inv, power-law:<a>,<b>, near-wf:<c>, or none)");
}

}  // namespace fadcap
