#include "clvkit/special_functions.hpp"

#include "clvkit/error.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace clvkit {

namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczosCoeffs{
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7,
};

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

// Requires x >= 0.5.
double lanczos_ln_gamma(double x) {
    const double z = x - 1.0;
    double series = kLanczosCoeffs[0];
    for (std::size_t i = 1; i < kLanczosCoeffs.size(); ++i) {
        series += kLanczosCoeffs[i] / (z + static_cast<double>(i));
    }
    const double t = z + kLanczosG + 0.5;
    return kHalfLog2Pi + (z + 0.5) * std::log(t) - t + std::log(series);
}

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

// sin(pi x) with the argument reduced first so large |x| keeps its accuracy.
double sin_pi(double x) {
    const double n = std::round(x);
    const double r = x - n;
    const double s = std::sin(std::numbers::pi * r);
    return std::fmod(n, 2.0) == 0.0 ? s : -s;
}

} // namespace

double ln_gamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError("ln_gamma: argument must be positive and finite, got " + std::to_string(x));
    }
    if (x == 1.0 || x == 2.0) return 0.0;
    if (x < 0.5) {
        // Reflection: Γ(x) Γ(1-x) = π / sin(πx), with sin(πx) > 0 on (0, 0.5).
        return std::log(std::numbers::pi / sin_pi(x)) - lanczos_ln_gamma(1.0 - x);
    }
    return lanczos_ln_gamma(x);
}

double ln_abs_gamma(double x, int& sign) {
    if (!std::isfinite(x) || is_nonpositive_integer(x)) {
        throw DomainError("ln_abs_gamma: pole or non-finite argument " + std::to_string(x));
    }
    if (x > 0.0) {
        sign = 1;
        return ln_gamma(x);
    }
    const double s = sin_pi(x);
    sign = s > 0.0 ? 1 : -1;
    return std::log(std::numbers::pi / std::fabs(s)) - ln_gamma(1.0 - x);
}

double ln_beta(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw DomainError("ln_beta: arguments must be positive, got (" + std::to_string(a) + ", " +
                          std::to_string(b) + ")");
    }
    return ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
}

namespace {

long double series_sum(double a, double b, double c, double z, const Hyp2f1Options& options) {
    long double term = 1.0L;
    long double sum = 1.0L;
    if (z == 0.0) return 1.0L;
    for (std::size_t n = 0; n < options.max_terms; ++n) {
        const long double nn = static_cast<long double>(n);
        term *= (a + nn) * (b + nn) / ((c + nn) * (nn + 1.0L)) * z;
        sum += term;
        if (term == 0.0L) return sum;
        // Converged once the tail is negligible and terms have started shrinking for good.
        const long double next_ratio = std::fabs((a + nn + 1.0L) * (b + nn + 1.0L) /
                                                 ((c + nn + 1.0L) * (nn + 2.0L)) * z);
        if (std::fabs(term) <= options.relative_tail * std::fabs(sum) && next_ratio < 1.0L) return sum;
    }
    throw NumericError("hyp2f1: series did not converge within " + std::to_string(options.max_terms) +
                       " terms (a=" + std::to_string(a) + ", b=" + std::to_string(b) +
                       ", c=" + std::to_string(c) + ", z=" + std::to_string(z) + ")");
}

} // namespace

double hyp2f1_series(double a, double b, double c, double z, const Hyp2f1Options& options) {
    if (is_nonpositive_integer(c)) {
        throw DomainError("hyp2f1: c must not be a nonpositive integer, got " + std::to_string(c));
    }
    if (!(std::fabs(z) < 1.0)) {
        throw DomainError("hyp2f1_series: |z| must be < 1, got " + std::to_string(z));
    }
    return static_cast<double>(series_sum(a, b, c, z, options));
}

namespace {

// Γ(x1) Γ(x2) / (Γ(x3) Γ(x4)) as (log magnitude, sign); zero when a denominator argument is a pole.
struct SignedLog {
    double log_magnitude;
    int sign;
};

SignedLog gamma_ratio(double x1, double x2, double x3, double x4) {
    if (is_nonpositive_integer(x3) || is_nonpositive_integer(x4)) {
        return {-INFINITY, 0};
    }
    int s1 = 1, s2 = 1, s3 = 1, s4 = 1;
    const double lg = ln_abs_gamma(x1, s1) + ln_abs_gamma(x2, s2) - ln_abs_gamma(x3, s3) - ln_abs_gamma(x4, s4);
    return {lg, s1 * s2 * s3 * s4};
}

double hyp2f1_near_one(double a, double b, double c, double z, const Hyp2f1Options& options) {
    const double w = 1.0 - z;
    const double s = c - a - b;
    const SignedLog first = gamma_ratio(c, s, c - a, c - b);
    const SignedLog second = gamma_ratio(c, -s, a, b);
    double result = 0.0;
    if (first.sign != 0) {
        result += first.sign * std::exp(first.log_magnitude) * hyp2f1_series(a, b, 1.0 - s, w, options);
    }
    if (second.sign != 0) {
        result += second.sign * std::exp(second.log_magnitude + s * std::log(w)) *
                  hyp2f1_series(c - a, c - b, 1.0 + s, w, options);
    }
    return result;
}

} // namespace

double hyp2f1(double a, double b, double c, double z, const Hyp2f1Options& options) {
    if (is_nonpositive_integer(c)) {
        throw DomainError("hyp2f1: c must not be a nonpositive integer, got " + std::to_string(c));
    }
    if (!(z >= 0.0 && z < 1.0)) {
        throw DomainError("hyp2f1: z must lie in [0, 1), got " + std::to_string(z));
    }
    if (z == 0.0) return 1.0;
    // Terminating series: a polynomial, summed directly at any z.
    if (z <= 0.5 || is_nonpositive_integer(a) || is_nonpositive_integer(b)) {
        return hyp2f1_series(a, b, c, z, options);
    }
    const double s = c - a - b;
    if (z > 0.9 && std::fabs(s - std::round(s)) > 1e-4) {
        return hyp2f1_near_one(a, b, c, z, options);
    }
    // Euler transform, in long double so (1-z)^s and the series may over/underflow double separately.
    try {
        const long double v = std::pow(static_cast<long double>(1.0 - z), static_cast<long double>(s)) *
                              series_sum(c - a, c - b, c, z, options);
        const double out = static_cast<double>(v);
        if (std::isfinite(out)) return out;
    } catch (const NumericError&) {
        // Large c - a - b makes the transformed series slow while the direct one converges fast.
    }
    return static_cast<double>(series_sum(a, b, c, z, options));
}

} // namespace clvkit
