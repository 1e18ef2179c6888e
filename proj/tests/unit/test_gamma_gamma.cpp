#include "clvkit/gamma_gamma.hpp"
#include "clvkit/simulate.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

using namespace clvkit;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("pearson_correlation examples", "[gg][pearson]") {
    const std::vector<double> xs{1.0, 2.0, 3.0, 5.0};
    std::vector<double> neg(xs.size());
    std::transform(xs.begin(), xs.end(), neg.begin(), [](double v) { return -v; });
    CHECK_THAT(pearson_correlation(xs, xs), WithinAbs(1.0, 1e-15));
    CHECK_THAT(pearson_correlation(xs, neg), WithinAbs(-1.0, 1e-15));
    // Sxy = 5, Sxx = 2, Syy = 114 / 9.
    const std::vector<double> a{1.0, 2.0, 3.0}, b{2.0, 4.0, 7.0};
    CHECK_THAT(pearson_correlation(a, b), WithinAbs(15.0 / std::sqrt(228.0), 1e-14));
    CHECK_THAT(pearson_correlation(a, b), WithinAbs(0.9934, 1e-4));
}

TEST_CASE("pearson_correlation errors", "[gg][pearson]") {
    const std::vector<double> flat{2.0, 2.0, 2.0}, a{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(pearson_correlation(flat, a), DomainError);
    CHECK_THROWS_AS(pearson_correlation(a, flat), DomainError);
    CHECK_THROWS_AS(pearson_correlation(a, std::vector<double>{1.0, 2.0}), InputError);
    CHECK_THROWS_AS(pearson_correlation(std::vector<double>{1.0}, std::vector<double>{1.0}), InputError);
}

TEST_CASE("pearson_correlation stays in [-1, 1]", "[gg][pearson][property]") {
    std::mt19937_64 eng(4);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int k = 0; k < 500; ++k) {
        std::vector<double> x(10), y(10);
        for (int i = 0; i < 10; ++i) {
            x[i] = n(eng);
            y[i] = 0.9 * x[i] + 1e-3 * n(eng);
        }
        const double r = pearson_correlation(x, y);
        REQUIRE((r >= -1.0 && r <= 1.0));
    }
}

TEST_CASE("gg customer density closed form at one purchase", "[gg][likelihood]") {
    const GgCoefficients c{1.0, 2.0, 1.0};
    CHECK_THAT(gg_customer_log_likelihood(c, 1, 1.0), WithinAbs(std::log(0.25), 1e-14));
    for (const double m : {0.1, 0.5, 2.0, 9.0}) {
        CHECK_THAT(gg_customer_log_likelihood(c, 1, m), WithinAbs(std::log(2.0 / std::pow(1.0 + m, 3)), 1e-13));
    }
}

TEST_CASE("gg customer density integrates to one", "[gg][likelihood]") {
    const GgCoefficients c{2.0, 3.0, 4.0};
    boost::math::quadrature::exp_sinh<double> integrator;
    const double total = integrator.integrate([&](double m) { return std::exp(gg_customer_log_likelihood(c, 2, m)); });
    CHECK_THAT(total, WithinAbs(1.0, 1e-6));
}

TEST_CASE("gg log-likelihood additivity, permutation and input checks", "[gg][likelihood][property]") {
    const GgCoefficients c{4.5, 2.0, 3.0};
    std::mt19937_64 eng(12);
    std::uniform_int_distribution<int> x(1, 20);
    std::uniform_real_distribution<double> m(0.5, 50.0);
    std::vector<GgObservation> rows;
    for (int i = 0; i < 500; ++i) rows.push_back({x(eng), m(eng)});
    const double once = gg_log_likelihood(c, rows);
    auto doubled = rows;
    doubled.insert(doubled.end(), rows.begin(), rows.end());
    CHECK_THAT(gg_log_likelihood(c, doubled), WithinRel(2.0 * once, 1e-14));
    std::shuffle(rows.begin(), rows.end(), eng);
    CHECK_THAT(gg_log_likelihood(c, rows), WithinRel(once, 1e-14));

    CHECK_THROWS_AS(gg_log_likelihood(c, std::vector<GgObservation>{{0, 3.0}}), InputError);
    CHECK_THROWS_AS(gg_log_likelihood(c, std::vector<GgObservation>{{2, 0.0}}), InputError);
}

TEST_CASE("gg_observations keeps repeat customers with spend", "[gg]") {
    const std::vector<RfmRow> rfm{{"a", 0, 0.0, 5.0, 0.0}, {"b", 2, 3.0, 5.0, 10.0}, {"c", 1, 1.0, 5.0, 0.0}};
    const auto obs = gg_observations(rfm);
    REQUIRE(obs.size() == 1);
    CHECK(obs[0].frequency == 2);
    CHECK(obs[0].monetary == 10.0);
}

TEST_CASE("conditional mean transaction value", "[gg][expectation]") {
    const GgCoefficients c{2.0, 3.0, 4.0};
    CHECK_THAT(conditional_mean_transaction_value(c, 1, 5.0), WithinAbs(4.5, 1e-14));
    CHECK_THAT(conditional_mean_transaction_value(c, 1000000, 7.25), WithinRel(7.25, 1e-3));
    CHECK_THAT(population_mean_transaction_value(c), WithinAbs(4.0, 1e-14));
    CHECK_THROWS_AS(conditional_mean_transaction_value({0.2, 0.5, 1.0}, 1, 2.0), DomainError);
    CHECK_THROWS_AS(population_mean_transaction_value({4.495408, 0.038024, 4.360291}), DomainError);
    // Finite for repeat customers even with q < 1.
    CHECK(std::isfinite(conditional_mean_transaction_value({4.495408, 0.038024, 4.360291}, 1, 3.0)));
}

TEST_CASE("conditional mean is a blend of prior and observation", "[gg][expectation][property]") {
    std::mt19937_64 eng(31);
    std::uniform_real_distribution<double> par(0.1, 10.0), spend(0.01, 100.0);
    std::uniform_int_distribution<int> freq(1, 50);
    for (int i = 0; i < 5000; ++i) {
        const GgCoefficients c{par(eng), 1.0 + par(eng), par(eng)};
        const std::int64_t x = freq(eng);
        const double m = spend(eng);
        const double prior = population_mean_transaction_value(c);
        const double v = conditional_mean_transaction_value(c, x, m);
        REQUIRE(v >= std::min(m, prior) * (1.0 - 1e-12));
        REQUIRE(v <= std::max(m, prior) * (1.0 + 1e-12));
        REQUIRE(conditional_mean_transaction_value(c, x, m * 1.01) > v);
    }
}

TEST_CASE("posterior_ratio_literal", "[gg]") {
    const GgCoefficients c{4.495408, 0.038024, 4.360291};
    CHECK_THAT(posterior_ratio_literal(c, 2, 4.360291), WithinAbs(6.495408 / 4.398315, 1e-12));
    CHECK_THAT(posterior_ratio_literal(c, 2, 4.360291), WithinAbs(1.47679, 1e-5));
    const GgCoefficients same{2.0, 2.0, 1.0};
    double previous = posterior_ratio_literal(same, 0, 0.1);
    for (double l = 0.2; l < 20.0; l += 0.1) {
        const double v = posterior_ratio_literal(same, 0, l);
        CHECK(v < previous);
        previous = v;
    }
}

TEST_CASE("fit_gg warns on correlated frequency and spend but still fits", "[gg][fit]") {
    std::mt19937_64 eng(2);
    std::uniform_int_distribution<int> freq(1, 12);
    std::vector<RfmRow> rfm;
    for (int i = 0; i < 400; ++i) {
        const int x = freq(eng);
        // Spend scale grows with frequency: correlation near 0.9.
        rfm.push_back({"u" + std::to_string(i), x, 10.0, 20.0, std::gamma_distribution<double>(20.0, 0.25 * x)(eng)});
    }
    std::vector<std::string> seen;
    const GgParams fitted = fit_gg(rfm, {}, 0.1, [&](const std::string& m) { seen.push_back(m); });
    CHECK(fitted.frequency_monetary_correlation > 0.8);
    CHECK(seen.size() == 1);
    CHECK(fitted.warnings == seen);
    CHECK(fitted.n_customers == rfm.size());

    const GgParams quiet = fit_gg(rfm, {}, 0.99);
    CHECK(quiet.warnings.empty());
    CHECK(quiet.coefficients.as_array() == fitted.coefficients.as_array());
}

TEST_CASE("fit_gg errors without repeat spend", "[gg][fit]") {
    const std::vector<RfmRow> rfm{{"a", 0, 0.0, 5.0, 0.0}, {"b", 0, 0.0, 3.0, 0.0}};
    CHECK_THROWS_AS(fit_gg(rfm), FitError);
}

TEST_CASE("fit_gg recovers simulated spend parameters", "[gg][fit]") {
    SimulationConfig config;
    config.n_customers = 20000;
    config.horizon = 78.0;
    config.bgnbd = {0.25, 4.5, 0.8, 2.4};
    config.spend = GgCoefficients{6.0, 4.0, 15.0};
    config.seed = 77;
    const auto rfm = simulation_rfm(simulate_customers(config), config.horizon);
    const GgParams fitted = fit_gg(rfm);
    const GgParams again = fit_gg(rfm);
    CHECK(fitted.coefficients.as_array() == again.coefficients.as_array());
    const std::array<double, 3> truth{6.0, 4.0, 15.0};
    for (std::size_t i = 0; i < 3; ++i) {
        const double est = fitted.coefficients.as_array()[i];
        INFO(kGgParameterNames[i] << " = " << est << " se " << fitted.standard_errors[i]);
        CHECK((std::fabs(est - truth[i]) <= 0.1 * truth[i] ||
               std::fabs(est - truth[i]) <= 3.0 * fitted.standard_errors[i]));
        CHECK_THAT(fitted.ci95[i].first, WithinRel(est - 1.96 * fitted.standard_errors[i], 1e-12));
    }
}
