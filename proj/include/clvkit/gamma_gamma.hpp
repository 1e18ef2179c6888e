#pragma once

#include "clvkit/bgnbd.hpp"
#include "clvkit/error.hpp"
#include "clvkit/ingest.hpp"
#include "clvkit/optimize.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace clvkit {

/// Gamma-Gamma spend model: transaction values ~ Gamma(shape p, rate nu), nu ~ Gamma(shape q, rate gamma).
/// `gamma` is the coefficient the published tables label "lambda".
struct GgCoefficients {
    double p{1.0};
    double q{1.0};
    double gamma{1.0};

    void validate() const;
    [[nodiscard]] std::array<double, 3> as_array() const { return {p, q, gamma}; }
};

inline constexpr std::array<const char*, 3> kGgParameterNames{"p", "q", "gamma"};

struct GgObservation {
    std::int64_t frequency{1};  // repeat purchases, >= 1
    double monetary{0.0};       // mean value of those purchases, > 0
};

struct GgParams {
    GgCoefficients coefficients;
    std::array<double, 3> standard_errors{};
    std::array<std::pair<double, double>, 3> ci95{};
    double log_likelihood{0.0};
    std::size_t n_customers{0};
    /// Pearson correlation of (frequency, monetary) over repeat customers; NaN when undefined.
    double frequency_monetary_correlation{0.0};
    double correlation_threshold{0.1};
    /// Mean observed monetary value over the repeat customers used in the fit.
    double sample_mean_monetary{0.0};
    std::vector<std::string> warnings;
    FitSettings fit;
};

/// Sample Pearson correlation. Throws InputError on length mismatch or fewer than two points and
/// DomainError ("undefined correlation") when either sequence has zero variance.
[[nodiscard]] double pearson_correlation(std::span<const double> xs, std::span<const double> ys);

/// ln f(m | p, q, gamma, x): marginal density of a customer's mean spend over x purchases.
[[nodiscard]] double gg_customer_log_likelihood(const GgCoefficients& c, std::int64_t x, double monetary);

/// Throws InputError for a row with x < 1 or monetary <= 0.
[[nodiscard]] double gg_log_likelihood(const GgCoefficients& c, std::span<const GgObservation> rows);

/// Repeat customers (frequency >= 1, monetary > 0) of an RFM table.
[[nodiscard]] std::vector<GgObservation> gg_observations(std::span<const RfmRow> rfm);

[[nodiscard]] Objective gg_objective(std::span<const GgObservation> rows);

/// Fits on the repeat customers of `rfm` over log-parameters from (1, 1, 1). Warns (GgParams::warnings and
/// `on_warning`) when |corr(frequency, monetary)| exceeds the threshold; the fit is still returned.
/// Throws FitError when no customer is eligible, on non-convergence or a singular information matrix.
[[nodiscard]] GgParams fit_gg(std::span<const RfmRow> rfm, const OptimizerConfig& config = {},
                              double correlation_threshold = 0.1, const WarningHandler& on_warning = {});

/// Posterior mean spend per transaction, p (gamma + x m) / (p x + q - 1).
/// Throws DomainError when p x + q <= 1.
[[nodiscard]] double conditional_mean_transaction_value(const GgCoefficients& c, std::int64_t x, double monetary);

/// Prior mean spend per transaction, gamma p / (q - 1). Throws DomainError when q <= 1.
[[nodiscard]] double population_mean_transaction_value(const GgCoefficients& c);

/// (p + x) / (q + lambda_coeff): a gamma-rate posterior mean kept in its published form.
/// It contains no spend observation and is not used for value predictions.
[[nodiscard]] double posterior_ratio_literal(const GgCoefficients& c, std::int64_t x, double lambda_coeff);

} // namespace clvkit
