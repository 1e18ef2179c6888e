#include "clvkit/predict.hpp"

#include "clvkit/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace clvkit {

std::string_view to_string(ValueSource source) {
    switch (source) {
    case ValueSource::conditional_mean: return "conditional_mean";
    case ValueSource::population_mean: return "population_mean";
    case ValueSource::sample_mean: return "sample_mean";
    }
    return "unknown";
}

namespace {

struct ValueEstimate {
    double value;
    ValueSource source;
};

ValueEstimate value_per_transaction(const GgParams& gg, const RfmRow& row) {
    const GgCoefficients& c = gg.coefficients;
    if (row.frequency >= 1 && row.monetary > 0.0 &&
        c.p * static_cast<double>(row.frequency) + c.q > 1.0) {
        return {conditional_mean_transaction_value(c, row.frequency, row.monetary), ValueSource::conditional_mean};
    }
    if (c.q > 1.0) return {population_mean_transaction_value(c), ValueSource::population_mean};
    return {gg.sample_mean_monetary, ValueSource::sample_mean};
}

} // namespace

CustomerPrediction predict_customer(const BgnbdParams& bgnbd, const GgParams& gg, const RfmRow& row, double horizon,
                                    double discount_rate) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InputError("prediction horizon must be positive");
    if (!(discount_rate >= 0.0) || !std::isfinite(discount_rate)) {
        throw InputError("discount rate must be nonnegative");
    }
    const BgnbdCoefficients& c = bgnbd.coefficients;

    CustomerPrediction out;
    out.user_id = row.user_id;
    out.horizon = horizon;
    out.discount_rate = discount_rate;
    out.p_alive = probability_alive(c, row.frequency, row.recency, row.age);
    out.expected_transactions =
        conditional_expected_transactions(c, horizon, row.frequency, row.recency, row.age);
    const ValueEstimate v = value_per_transaction(gg, row);
    out.expected_value = v.value;
    out.value_source = v.source;

    if (discount_rate == 0.0) {
        out.expected_clv = out.expected_transactions * out.expected_value;
        return out;
    }
    double clv = 0.0;
    double previous = 0.0;
    for (double left = 0.0; left < horizon; left += 1.0) {
        const double right = std::min(left + 1.0, horizon);
        const double cumulative =
            right == horizon ? out.expected_transactions
                             : conditional_expected_transactions(c, right, row.frequency, row.recency, row.age);
        const double midpoint = 0.5 * (left + right);
        clv += (cumulative - previous) * out.expected_value * std::exp(-discount_rate * midpoint);
        previous = cumulative;
    }
    out.expected_clv = std::max(0.0, clv);
    return out;
}

std::vector<CustomerPrediction> predict_customers(const BgnbdParams& bgnbd, const GgParams& gg,
                                                  std::span<const RfmRow> rows, double horizon,
                                                  double discount_rate) {
    std::vector<CustomerPrediction> out(rows.size());
    kernels::predict_parallel(bgnbd, gg, rows, horizon, discount_rate, out);
    return out;
}

std::vector<ChurnTimelinePoint> churn_timeline(const BgnbdCoefficients& c, std::span<const double> purchases,
                                               double grid_step, double as_of) {
    if (purchases.empty()) throw InputError("churn_timeline: no purchases");
    if (!(grid_step > 0.0)) throw InputError("churn_timeline: grid step must be positive");
    if (!std::is_sorted(purchases.begin(), purchases.end())) throw InputError("churn_timeline: purchases are not sorted");
    if (!(as_of >= purchases.back())) throw InputError("churn_timeline: as_of precedes the last purchase");

    std::vector<double> instants;
    for (const double p : purchases) {
        if (instants.empty() || p != instants.back()) instants.push_back(p);
    }
    const double first = instants.front();

    std::vector<ChurnTimelinePoint> out;
    std::size_t next_purchase = 0;   // index of the first purchase instant not yet emitted
    std::size_t seen = 0;            // purchase instants at or before the current time
    auto emit = [&](double s, bool is_purchase) {
        while (seen < instants.size() && instants[seen] <= s) ++seen;
        const auto x = static_cast<std::int64_t>(seen) - 1;
        const double recency = instants[seen - 1] - first;
        const double age = s - first;
        out.push_back({age, probability_alive(c, x, recency, age), is_purchase});
    };

    const auto steps = static_cast<std::size_t>(std::floor((as_of - first) / grid_step + 1e-9));
    for (std::size_t k = 0; k <= steps; ++k) {
        const double s = first + static_cast<double>(k) * grid_step;
        while (next_purchase < instants.size() && instants[next_purchase] < s) {
            emit(instants[next_purchase], true);
            ++next_purchase;
        }
        const bool on_purchase = next_purchase < instants.size() && instants[next_purchase] == s;
        if (on_purchase) ++next_purchase;
        emit(s, on_purchase);
    }
    while (next_purchase < instants.size()) {
        emit(instants[next_purchase], true);
        ++next_purchase;
    }
    return out;
}

} // namespace clvkit
