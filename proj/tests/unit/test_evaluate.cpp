#include "clvkit/evaluate.hpp"
#include "clvkit/simulate.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace clvkit;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const BgnbdCoefficients kSim{0.25, 4.5, 0.8, 2.4};

} // namespace

TEST_CASE("regression metrics hand example", "[evaluate][metrics]") {
    const std::vector<double> actual{0.0, 2.0}, predicted{1.0, 1.0};
    const MetricsReport m = regression_metrics(actual, predicted);
    CHECK(m.n == 2);
    CHECK(m.mse == 1.0);
    CHECK(m.mae == 1.0);
    const double expected = (std::pow(std::log(1.0) - std::log(2.0), 2) + std::pow(std::log(3.0) - std::log(2.0), 2)) / 2.0;
    CHECK_THAT(m.msle, WithinRel(expected, 1e-14));
    CHECK_THAT(m.msle, WithinAbs(0.3224, 1e-4));
}

TEST_CASE("perfect predictions give zero metrics", "[evaluate][metrics]") {
    const std::vector<double> v{0.0, 3.0, 1.5, 12.0};
    const MetricsReport m = regression_metrics(v, v);
    CHECK(m.mse == 0.0);
    CHECK(m.mae == 0.0);
    CHECK(m.msle == 0.0);
}

TEST_CASE("metrics are nonnegative and symmetric", "[evaluate][metrics][property]") {
    std::mt19937_64 eng(6);
    std::uniform_real_distribution<double> u(0.0, 20.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(25), p(25);
        for (int i = 0; i < 25; ++i) {
            a[i] = std::floor(u(eng));
            p[i] = u(eng);
        }
        const MetricsReport ap = regression_metrics(a, p);
        const MetricsReport pa = regression_metrics(p, a);
        REQUIRE((ap.mse >= 0.0 && ap.mae >= 0.0 && ap.msle >= 0.0));
        REQUIRE(ap.mse == pa.mse);
        REQUIRE(ap.mae == pa.mae);
        REQUIRE(ap.msle == pa.msle);
    }
}

TEST_CASE("metrics input checks", "[evaluate][metrics]") {
    const std::vector<double> two{1.0, 2.0}, three{1.0, 2.0, 3.0}, none;
    CHECK_THROWS_AS(regression_metrics(two, three), InputError);
    CHECK_THROWS_AS(regression_metrics(none, none), InputError);
    CHECK_THROWS_AS(regression_metrics(std::vector<double>{-1.0}, std::vector<double>{0.0}), InputError);
}

TEST_CASE("frequency comparison bins and totals", "[evaluate][histogram]") {
    std::vector<RfmRow> rows;
    for (int i = 0; i < 300; ++i) rows.push_back({"u" + std::to_string(i), i % 12, 1.0, 40.0, 0.0});
    FrequencyComparisonConfig config;
    config.horizon = 40.0;
    config.seed = 3;
    const FrequencyComparison cmp = repeat_frequency_comparison(rows, kSim, config);
    REQUIRE(cmp.bins.size() == 8);
    for (int k = 0; k < 7; ++k) CHECK(cmp.bins[k].label == std::to_string(k));
    CHECK(cmp.bins[7].label == "7+");
    CHECK(cmp.n_actual == 300);
    CHECK(cmp.n_simulated == 3000);
    double actual = 0.0, simulated = 0.0;
    for (const auto& b : cmp.bins) {
        actual += b.actual;
        simulated += b.simulated;
    }
    CHECK(actual == 300.0);
    CHECK_THAT(simulated, WithinAbs(300.0, 1e-9));
    CHECK(cmp.bins[7].actual == 25.0 * 5.0);

    const FrequencyComparison again = repeat_frequency_comparison(rows, kSim, config);
    for (std::size_t k = 0; k < cmp.bins.size(); ++k) CHECK(again.bins[k].simulated == cmp.bins[k].simulated);

    config.max_bin = 0;
    CHECK_THROWS_AS(repeat_frequency_comparison(rows, kSim, config), InputError);
}

TEST_CASE("frequency comparison against its own generating parameters", "[evaluate][histogram]") {
    // Large enough that every populated bin has well over 100 customers and sampling noise is near 1%.
    SimulationConfig config;
    config.n_customers = 200000;
    config.horizon = 78.0;
    config.bgnbd = kSim;
    config.seed = 100;
    const auto rows = simulation_rfm(simulate_customers(config), config.horizon);
    FrequencyComparisonConfig cmp_config;
    cmp_config.horizon = 78.0;
    cmp_config.seed = 200;
    const FrequencyComparison cmp = repeat_frequency_comparison(rows, kSim, cmp_config);
    for (const auto& b : cmp.bins) {
        if (b.actual < 100.0) continue;
        INFO("bin " << b.label << " actual " << b.actual << " simulated " << b.simulated);
        CHECK(std::fabs(b.simulated - b.actual) / b.actual < 0.05);
    }
}

TEST_CASE("holdout grouping partitions customers", "[evaluate][holdout]") {
    const std::vector<CalibrationHoldoutRow> rows{
        {"a", 0, 0.0, 10.0, 0.0, 1, 5.0}, {"b", 2, 4.0, 10.0, 3.0, 0, 5.0},
        {"c", 0, 0.0, 8.0, 0.0, 0, 5.0},  {"d", 2, 9.0, 10.0, 3.0, 3, 5.0},
    };
    const std::vector<double> predicted{0.5, 1.0, 0.25, 2.0};
    const HoldoutEvaluation e = evaluate_holdout_predictions(rows, predicted);
    REQUIRE(e.groups.size() == 2);
    CHECK(e.groups[0].frequency_cal == 0);
    CHECK(e.groups[0].n == 2);
    CHECK(e.groups[0].mean_actual == 0.5);
    CHECK(e.groups[0].mean_predicted == 0.375);
    CHECK(e.groups[0].low_support);
    CHECK(e.groups[1].mean_actual == 1.5);
    CHECK(e.groups[0].n + e.groups[1].n == rows.size());
    CHECK(e.metrics.n == 4);
    CHECK(e.predicted == predicted);

    std::vector<double> exact;
    for (const auto& r : rows) exact.push_back(static_cast<double>(r.frequency_holdout));
    const HoldoutEvaluation perfect = evaluate_holdout_predictions(rows, exact);
    CHECK(perfect.metrics.mse == 0.0);
    CHECK(perfect.metrics.mae == 0.0);
    CHECK(perfect.metrics.msle == 0.0);
}

TEST_CASE("holdout evaluation rejects mixed durations", "[evaluate][holdout]") {
    const std::vector<CalibrationHoldoutRow> rows{{"a", 0, 0.0, 10.0, 0.0, 1, 5.0}, {"b", 1, 2.0, 10.0, 3.0, 0, 6.0}};
    CHECK_THROWS_AS(calibration_holdout_eval(rows, kSim), InputError);
    CHECK_THROWS_AS(evaluate_holdout_predictions(rows, std::vector<double>{1.0}), InputError);
}

TEST_CASE("calibration holdout evaluation uses conditional expectations", "[evaluate][holdout]") {
    SimulationConfig config;
    config.n_customers = 5000;
    config.horizon = 78.0;
    config.bgnbd = kSim;
    config.seed = 55;
    const auto rows = simulation_calibration_holdout(simulate_customers(config), 39.0, 78.0);
    const HoldoutEvaluation e = calibration_holdout_eval(rows, kSim);
    REQUIRE(e.predicted.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); i += 97) {
        CHECK(e.predicted[i] == conditional_expected_transactions(kSim, 39.0, rows[i].frequency_cal, rows[i].recency_cal,
                                                                  rows[i].age_cal));
    }
    std::size_t total = 0;
    for (const auto& g : e.groups) {
        total += g.n;
        CHECK(g.low_support == (g.n < kMinGroupSupport));
    }
    CHECK(total == rows.size());
}
