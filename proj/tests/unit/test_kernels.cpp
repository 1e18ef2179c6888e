#include "clvkit/kernels.hpp"
#include "clvkit/simulate.hpp"

#include <catch_amalgamated.hpp>

#include <cstring>

using namespace clvkit;

namespace {

bool same_bits(std::span<const double> a, std::span<const double> b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

Simulation population(std::size_t n) {
    SimulationConfig config;
    config.n_customers = n;
    config.horizon = 78.0;
    config.bgnbd = {0.25, 4.5, 0.8, 2.4};
    config.spend = GgCoefficients{6.0, 4.0, 15.0};
    config.seed = 404;
    return simulate_customers(config);
}

template <typename Fn>
std::string message_of(Fn&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("likelihood terms are bit-identical serial and parallel", "[kernels]") {
    const auto rows = simulation_rfm(population(10007), 78.0);
    const BgnbdCoefficients c{0.3, 4.0, 0.9, 2.0};
    std::vector<double> serial(rows.size()), parallel(rows.size());
    kernels::bgnbd_terms_serial(c, rows, serial);
    kernels::bgnbd_terms_parallel(c, rows, parallel);
    CHECK(same_bits(serial, parallel));

    const auto obs = gg_observations(rows);
    std::vector<double> gs(obs.size()), gp(obs.size());
    kernels::gg_terms_serial({6.0, 4.0, 15.0}, obs, gs);
    kernels::gg_terms_parallel({6.0, 4.0, 15.0}, obs, gp);
    CHECK(same_bits(gs, gp));
}

TEST_CASE("simulation is bit-identical serial and parallel", "[kernels]") {
    SimulationConfig config;
    config.n_customers = 5003;
    config.horizon = 40.0;
    config.bgnbd = {0.25, 4.5, 0.8, 2.4};
    config.spend = GgCoefficients{6.0, 4.0, 15.0};
    config.seed = 8;
    std::vector<SimulatedCustomer> serial(config.n_customers), parallel(config.n_customers);
    kernels::simulate_serial(config, serial);
    kernels::simulate_parallel(config, parallel);
    for (std::size_t i = 0; i < serial.size(); ++i) {
        REQUIRE(same_bits(serial[i].times, parallel[i].times));
        REQUIRE(same_bits(serial[i].values, parallel[i].values));
        REQUIRE(serial[i].latent.lambda == parallel[i].latent.lambda);
    }
}

TEST_CASE("batch prediction is identical serial and parallel", "[kernels]") {
    const auto rows = simulation_rfm(population(4001), 78.0);
    BgnbdParams bg;
    bg.coefficients = {0.25, 4.5, 0.8, 2.4};
    GgParams gg;
    gg.coefficients = {6.0, 4.0, 15.0};
    std::vector<CustomerPrediction> serial(rows.size()), parallel(rows.size());
    kernels::predict_serial(bg, gg, rows, 12.0, 0.01, serial);
    kernels::predict_parallel(bg, gg, rows, 12.0, 0.01, parallel);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        REQUIRE(serial[i].user_id == parallel[i].user_id);
        REQUIRE(serial[i].expected_clv == parallel[i].expected_clv);
        REQUIRE(serial[i].p_alive == parallel[i].p_alive);
    }
}

TEST_CASE("parallel kernels report the first failing row like the serial ones", "[kernels]") {
    auto rows = simulation_rfm(population(3000), 78.0);
    rows[1700].recency = rows[1700].age + 1.0;
    rows[2900].frequency = -3;
    const BgnbdCoefficients c{0.3, 4.0, 0.9, 2.0};
    std::vector<double> out(rows.size());
    const std::string serial = message_of([&] { kernels::bgnbd_terms_serial(c, rows, out); });
    const std::string parallel = message_of([&] { kernels::bgnbd_terms_parallel(c, rows, out); });
    CHECK_FALSE(serial.empty());
    CHECK(serial == parallel);
    CHECK_THROWS_AS(kernels::bgnbd_terms_parallel(c, rows, out), InputError);
}

TEST_CASE("kernels reject mismatched output spans", "[kernels]") {
    const std::vector<RfmRow> rows{{"a", 1, 1.0, 2.0, 1.0}};
    std::vector<double> out(2);
    CHECK_THROWS_AS(kernels::bgnbd_terms_parallel({1.0, 1.0, 1.0, 1.0}, rows, out), InputError);
    CHECK_THROWS_AS(kernels::bgnbd_terms_serial({1.0, 1.0, 1.0, 1.0}, rows, out), InputError);
}
