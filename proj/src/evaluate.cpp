#include "clvkit/evaluate.hpp"

#include "clvkit/simulate.hpp"
#include "clvkit/summation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace clvkit {

MetricsReport regression_metrics(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) throw InputError("regression_metrics: sequences differ in length");
    if (actual.empty()) throw InputError("regression_metrics: empty sequences");
    const std::size_t n = actual.size();
    std::vector<double> sq(n), ab(n), lg(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = actual[i];
        const double p = predicted[i];
        if (!(a > -1.0) || !(p > -1.0) || !std::isfinite(a) || !std::isfinite(p)) {
            throw InputError("regression_metrics: values must be finite and > -1");
        }
        const double d = a - p;
        const double dl = std::log1p(a) - std::log1p(p);
        sq[i] = d * d;
        ab[i] = std::fabs(d);
        lg[i] = dl * dl;
    }
    const auto nd = static_cast<double>(n);
    return {compensated_sum(sq) / nd, compensated_sum(ab) / nd, compensated_sum(lg) / nd, n};
}

FrequencyComparison repeat_frequency_comparison(std::span<const RfmRow> actual, const BgnbdCoefficients& c,
                                                const FrequencyComparisonConfig& config) {
    if (config.max_bin < 1) throw InputError("max_bin must be at least 1");
    if (config.multiplier < 1) throw InputError("simulation multiplier must be at least 1");
    if (actual.empty()) throw InputError("repeat_frequency_comparison: no customers");

    const auto n_bins = static_cast<std::size_t>(config.max_bin) + 1;
    auto bin_of = [&](std::int64_t x) {
        return static_cast<std::size_t>(std::clamp<std::int64_t>(x, 0, config.max_bin));
    };

    FrequencyComparison out;
    out.bins.resize(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) out.bins[k].label = std::to_string(k);
    out.bins.back().label += "+";

    for (const RfmRow& row : actual) out.bins[bin_of(row.frequency)].actual += 1.0;
    out.n_actual = actual.size();

    SimulationConfig sim_config;
    sim_config.n_customers = actual.size() * config.multiplier;
    sim_config.horizon = config.horizon;
    sim_config.bgnbd = c;
    sim_config.seed = config.seed;
    const Simulation sim = simulate_customers(sim_config);
    std::vector<double> counts(n_bins, 0.0);
    for (const SimulatedCustomer& cust : sim.customers) {
        counts[bin_of(static_cast<std::int64_t>(cust.times.size()) - 1)] += 1.0;
    }
    const auto scale = 1.0 / static_cast<double>(config.multiplier);
    for (std::size_t k = 0; k < n_bins; ++k) out.bins[k].simulated = counts[k] * scale;
    out.n_simulated = sim.customers.size();
    return out;
}

HoldoutEvaluation evaluate_holdout_predictions(std::span<const CalibrationHoldoutRow> rows,
                                               std::span<const double> predicted) {
    if (rows.empty()) throw InputError("holdout evaluation: no rows");
    if (rows.size() != predicted.size()) throw InputError("holdout evaluation: prediction count differs from rows");
    const double duration = rows.front().holdout_duration;
    for (const auto& r : rows) {
        if (std::fabs(r.holdout_duration - duration) > 1e-9 * std::max(1.0, std::fabs(duration))) {
            throw InputError("holdout evaluation: rows disagree on holdout duration");
        }
    }

    struct Accumulator {
        std::vector<double> actual;
        std::vector<double> predicted;
    };
    std::map<std::int64_t, Accumulator> by_frequency;
    std::vector<double> actual(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        actual[i] = static_cast<double>(rows[i].frequency_holdout);
        auto& acc = by_frequency[rows[i].frequency_cal];
        acc.actual.push_back(actual[i]);
        acc.predicted.push_back(predicted[i]);
    }

    HoldoutEvaluation out;
    for (const auto& [x, acc] : by_frequency) {
        const auto n = static_cast<double>(acc.actual.size());
        out.groups.push_back({x, acc.actual.size(), compensated_sum(acc.actual) / n,
                              compensated_sum(acc.predicted) / n, acc.actual.size() < kMinGroupSupport});
    }
    out.metrics = regression_metrics(actual, predicted);
    out.predicted.assign(predicted.begin(), predicted.end());
    return out;
}

HoldoutEvaluation calibration_holdout_eval(std::span<const CalibrationHoldoutRow> rows, const BgnbdCoefficients& c) {
    std::vector<double> predicted(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        predicted[i] = conditional_expected_transactions(c, r.holdout_duration, r.frequency_cal, r.recency_cal,
                                                         r.age_cal);
    }
    return evaluate_holdout_predictions(rows, predicted);
}

} // namespace clvkit
