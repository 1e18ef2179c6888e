#pragma once

#include "clvkit/bgnbd.hpp"
#include "clvkit/ingest.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace clvkit {

struct MetricsReport {
    double mse{0.0};
    double mae{0.0};
    double msle{0.0};
    std::size_t n{0};
};

/// mse = mean((a - p)^2), mae = mean(|a - p|), msle = mean((ln(1 + a) - ln(1 + p))^2).
/// Throws InputError on empty or mismatched sequences or values <= -1.
[[nodiscard]] MetricsReport regression_metrics(std::span<const double> actual, std::span<const double> predicted);

struct HistogramBin {
    std::string label;  // "0", "1", ..., "7+"
    double actual{0.0};
    double simulated{0.0};  // rescaled to the actual population size
};

struct FrequencyComparison {
    std::vector<HistogramBin> bins;
    std::size_t n_actual{0};
    std::size_t n_simulated{0};
};

struct FrequencyComparisonConfig {
    double horizon{0.0};
    std::uint64_t seed{0};
    std::size_t multiplier{10};
    std::int64_t max_bin{7};
};

/// Repeat-purchase histogram of `actual` against multiplier x n customers simulated at `c` over `horizon`.
/// Bins 0..max_bin-1 plus "max_bin+"; simulated counts are divided by the multiplier.
[[nodiscard]] FrequencyComparison repeat_frequency_comparison(std::span<const RfmRow> actual,
                                                              const BgnbdCoefficients& c,
                                                              const FrequencyComparisonConfig& config);

struct FrequencyGroup {
    std::int64_t frequency_cal{0};
    std::size_t n{0};
    double mean_actual{0.0};
    double mean_predicted{0.0};
    bool low_support{false};  // fewer than kMinGroupSupport customers
};

inline constexpr std::size_t kMinGroupSupport = 10;

struct HoldoutEvaluation {
    std::vector<FrequencyGroup> groups;  // ascending frequency_cal
    MetricsReport metrics;
    std::vector<double> predicted;  // per row, input order
};

/// Groups rows by calibration frequency and scores `predicted` against holdout purchases.
/// Throws InputError when sizes differ, the table is empty or holdout durations disagree.
[[nodiscard]] HoldoutEvaluation evaluate_holdout_predictions(std::span<const CalibrationHoldoutRow> rows,
                                                             std::span<const double> predicted);

/// Predictions from conditional_expected_transactions over each row's holdout duration, then scored.
[[nodiscard]] HoldoutEvaluation calibration_holdout_eval(std::span<const CalibrationHoldoutRow> rows,
                                                         const BgnbdCoefficients& c);

} // namespace clvkit
