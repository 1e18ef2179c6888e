#pragma once

#include <cstddef>

namespace clvkit {

/// ln Γ(x) for x > 0 (Lanczos, g = 7, nine terms; reflection below 0.5).
/// Throws DomainError for x <= 0 or non-finite x.
[[nodiscard]] double ln_gamma(double x);

/// ln|Γ(x)| for any real x that is not a pole; `sign` receives the sign of Γ(x).
/// Throws DomainError at nonpositive integers.
[[nodiscard]] double ln_abs_gamma(double x, int& sign);

/// ln B(a, b) = ln Γ(a) + ln Γ(b) - ln Γ(a + b).
[[nodiscard]] double ln_beta(double a, double b);

struct Hyp2f1Options {
    std::size_t max_terms{10000};
    double relative_tail{1e-14};
};

/// Gaussian hypergeometric 2F1(a, b; c; z) for 0 <= z < 1.
///
/// z <= 0.5 sums the power series directly. Above that the Euler transform
/// 2F1(a,b;c;z) = (1-z)^(c-a-b) 2F1(c-a,c-b;c;z) is used, except for z > 0.9 with
/// c-a-b away from an integer, where the 1-z connection formula converges much faster.
/// Throws DomainError if c is a nonpositive integer or z is outside [0, 1), and
/// NumericError if a series needs more than `max_terms` terms.
[[nodiscard]] double hyp2f1(double a, double b, double c, double z, const Hyp2f1Options& options = {});

/// The raw power series without any transformation. Exposed for testing the transformed routes.
[[nodiscard]] double hyp2f1_series(double a, double b, double c, double z, const Hyp2f1Options& options = {});

} // namespace clvkit
