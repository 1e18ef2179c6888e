#pragma once

#include "clvkit/bgnbd.hpp"
#include "clvkit/gamma_gamma.hpp"
#include "clvkit/ingest.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace clvkit {

/// Where a prediction's value-per-transaction came from.
enum class ValueSource {
    conditional_mean,  // customer has repeat spend: posterior mean
    population_mean,   // no repeat spend, q > 1: prior mean gamma p / (q - 1)
    sample_mean,       // no repeat spend, q <= 1: mean observed spend of repeat customers in the fit
};

[[nodiscard]] std::string_view to_string(ValueSource source);

struct CustomerPrediction {
    std::string user_id;
    double p_alive{1.0};
    double expected_transactions{0.0};
    double expected_value{0.0};
    double expected_clv{0.0};
    double horizon{0.0};
    double discount_rate{0.0};
    ValueSource value_source{ValueSource::conditional_mean};
};

struct ChurnTimelinePoint {
    double time{0.0};  // time units since the first purchase
    double p_alive{1.0};
    bool is_purchase{false};
};

/// P(alive), expected purchases and expected spend over (T, T + horizon].
///
/// With discount_rate > 0 the horizon is cut into unit steps (the last may be partial) and each
/// step's incremental expected purchases are discounted at the step midpoint, e^(-rate * mid).
/// At discount_rate = 0 the CLV is exactly expected_transactions * expected_value.
/// Throws InputError when horizon <= 0 or discount_rate < 0.
[[nodiscard]] CustomerPrediction predict_customer(const BgnbdParams& bgnbd, const GgParams& gg, const RfmRow& row,
                                                  double horizon, double discount_rate = 0.0);

/// predict_customer over a table, in input order.
[[nodiscard]] std::vector<CustomerPrediction> predict_customers(const BgnbdParams& bgnbd, const GgParams& gg,
                                                                std::span<const RfmRow> rows, double horizon,
                                                                double discount_rate = 0.0);

/// P(alive) over time for one customer's purchase times (model time units, sorted, equal times merged).
/// Evaluated on a grid from the first purchase to `as_of` plus every purchase instant.
/// Throws InputError on unsorted or empty purchases, nonpositive grid_step, or as_of before the last purchase.
[[nodiscard]] std::vector<ChurnTimelinePoint> churn_timeline(const BgnbdCoefficients& c,
                                                             std::span<const double> purchases, double grid_step,
                                                             double as_of);

} // namespace clvkit
