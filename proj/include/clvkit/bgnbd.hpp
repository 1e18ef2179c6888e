#pragma once

#include "clvkit/error.hpp"
#include "clvkit/ingest.hpp"
#include "clvkit/optimize.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace clvkit {

/// Latent state of one customer: Poisson purchase rate and per-repeat-purchase dropout probability.
struct LatentCustomer {
    double lambda{0.0};
    double p_dropout{0.0};
};

/// BG/NBD population parameters. lambda ~ Gamma(shape r, RATE alpha); p ~ Beta(a, b).
struct BgnbdCoefficients {
    double r{1.0};
    double alpha{1.0};
    double a{1.0};
    double b{1.0};

    void validate() const;
    [[nodiscard]] std::array<double, 4> as_array() const { return {r, alpha, a, b}; }
};

inline constexpr std::array<const char*, 4> kBgnbdParameterNames{"r", "alpha", "a", "b"};

/// Settings used for a fit, echoed into the parameter document.
struct FitSettings {
    OptimizerConfig optimizer{};
    double penalizer{0.0};
    std::size_t iterations{0};
    std::size_t evaluations{0};
    bool converged{false};
};

struct BgnbdParams {
    BgnbdCoefficients coefficients;
    std::array<double, 4> standard_errors{};
    std::array<std::pair<double, double>, 4> ci95{};
    double log_likelihood{0.0};
    std::size_t n_customers{0};
    FitSettings fit;
};

/// P(X(t) = x | lambda, p): purchases in (0, t] for one customer, with dropout after each purchase.
[[nodiscard]] double individual_pmf(const LatentCustomer& customer, std::int64_t x, double t);

/// Per-customer log-likelihood with the coefficient-only terms precomputed.
class BgnbdLikelihood {
public:
    explicit BgnbdLikelihood(const BgnbdCoefficients& c);

    /// ln L(r, alpha, a, b | x, t_x, T).
    [[nodiscard]] double operator()(std::int64_t x, double recency, double age) const;

private:
    BgnbdCoefficients c_;
    double ln_alpha_;
    double ln_gamma_r_;
    double ln_beta_ab_;
};

/// Sum of per-customer log-likelihoods (parallel terms, fixed-order compensated reduction).
/// Throws InputError on an empty table.
[[nodiscard]] double log_likelihood(const BgnbdCoefficients& coefficients, std::span<const RfmRow> rfm);

/// Maximum likelihood over log-parameters starting from (1, 1, 1, 1), minimizing
/// -LL + penalizer * sum(log(param)^2). Standard errors by the delta method on the inverse
/// Hessian of -LL; ci95 = estimate +/- 1.96 SE.
/// Throws FitError on degenerate data (no repeat purchases), non-convergence or a singular information matrix.
[[nodiscard]] BgnbdParams fit_bgnbd(std::span<const RfmRow> rfm, const OptimizerConfig& config = {},
                                   double penalizer = 0.0);

/// Negative (optionally penalized) log-likelihood as a function of log-parameters; what fit_bgnbd minimizes.
[[nodiscard]] Objective bgnbd_objective(std::span<const RfmRow> rfm, double penalizer = 0.0);

[[nodiscard]] double probability_alive(const BgnbdCoefficients& c, std::int64_t x, double recency, double age);

/// Expected purchases in (T, T + horizon] given (x, t_x, T). Emits a warning through `on_warning`
/// when a < 1; throws DomainError when a == 1.
[[nodiscard]] double conditional_expected_transactions(const BgnbdCoefficients& c, double horizon, std::int64_t x,
                                                       double recency, double age,
                                                       const WarningHandler& on_warning = {});

/// Expected repeat purchases in (0, t] for a newly acquired customer. Throws DomainError when a == 1.
[[nodiscard]] double expected_transactions(const BgnbdCoefficients& c, double t);

enum class MatrixMode { expected_purchases, p_alive };

struct MatrixSpec {
    std::int64_t max_frequency{20};
    double max_recency{30.0};
    double recency_step{1.0};
    double age{30.0};
    MatrixMode mode{MatrixMode::p_alive};
    double horizon{1.0};
};

/// Rows are recency values 0, step, ..., max_recency; columns are frequencies 0..max_frequency.
/// Cells with recency > age are empty.
struct FrequencyRecencyMatrix {
    std::vector<double> recency;
    std::vector<std::int64_t> frequency;
    std::vector<std::optional<double>> cells;  // row-major

    [[nodiscard]] const std::optional<double>& at(std::size_t row, std::size_t col) const {
        return cells[row * frequency.size() + col];
    }
};

[[nodiscard]] FrequencyRecencyMatrix frequency_recency_matrix(const BgnbdCoefficients& c, const MatrixSpec& spec);

} // namespace clvkit
