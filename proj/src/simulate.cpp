#include "clvkit/simulate.hpp"

#include "clvkit/kernels.hpp"
#include "clvkit/random.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace clvkit {

void SimulationConfig::validate() const {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InputError("simulation horizon must be positive");
    bgnbd.validate();
    if (spend) spend->validate();
}

SimulatedCustomer simulate_customer(const SimulationConfig& config, std::size_t index) {
    RandomStream rng(derive_seed(config.seed, index));
    const BgnbdCoefficients& c = config.bgnbd;

    SimulatedCustomer out;
    out.latent.lambda = rng.gamma(c.r, c.alpha);
    out.latent.p_dropout = rng.beta(c.a, c.b);
    out.spend_rate = std::numeric_limits<double>::quiet_NaN();
    if (config.spend) out.spend_rate = rng.gamma(config.spend->q, config.spend->gamma);

    auto draw_value = [&] {
        if (!config.spend) return 0.0;
        // A vanishing spend rate would give an infinite value; treat as the largest finite rate draw.
        const double rate = std::max(out.spend_rate, std::numeric_limits<double>::min());
        return rng.gamma(config.spend->p, rate);
    };

    out.times.push_back(0.0);
    out.values.push_back(draw_value());
    if (!(out.latent.lambda > 0.0)) return out;
    double t = 0.0;
    for (;;) {
        t += rng.exponential(out.latent.lambda);
        if (!(t < config.horizon)) break;
        out.times.push_back(t);
        out.values.push_back(draw_value());
        if (rng.uniform() < out.latent.p_dropout) break;
    }
    return out;
}

Simulation simulate_customers(const SimulationConfig& config) {
    config.validate();
    Simulation sim;
    sim.horizon = config.horizon;
    sim.customers.resize(config.n_customers);
    kernels::simulate_parallel(config, sim.customers);
    return sim;
}

std::string simulated_user_id(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "c%09zu", index);
    return buf;
}

std::vector<RfmRow> simulation_rfm(const Simulation& sim, double observation_end) {
    if (!(observation_end > 0.0)) throw InputError("observation end must be positive");
    std::vector<RfmRow> rows;
    rows.reserve(sim.customers.size());
    for (std::size_t i = 0; i < sim.customers.size(); ++i) {
        const SimulatedCustomer& cust = sim.customers[i];
        RfmRow row;
        row.user_id = simulated_user_id(i);
        row.age = observation_end;
        double total = 0.0;
        for (std::size_t k = 1; k < cust.times.size() && cust.times[k] <= observation_end; ++k) {
            ++row.frequency;
            row.recency = cust.times[k];
            total += cust.values[k];
        }
        if (row.frequency > 0) row.monetary = total / static_cast<double>(row.frequency);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<CalibrationHoldoutRow> simulation_calibration_holdout(const Simulation& sim, double calibration_end,
                                                                  double observation_end) {
    if (!(calibration_end > 0.0) || !(calibration_end < observation_end)) {
        throw InputError("need 0 < calibration end < observation end");
    }
    const std::vector<RfmRow> cal = simulation_rfm(sim, calibration_end);
    std::vector<CalibrationHoldoutRow> rows;
    rows.reserve(cal.size());
    for (std::size_t i = 0; i < cal.size(); ++i) {
        std::int64_t holdout = 0;
        for (const double t : sim.customers[i].times) {
            if (t > calibration_end && t <= observation_end) ++holdout;
        }
        rows.push_back({cal[i].user_id, cal[i].frequency, cal[i].recency, cal[i].age, cal[i].monetary, holdout,
                        observation_end - calibration_end});
    }
    return rows;
}

TransactionLog simulation_transactions(const Simulation& sim, Timestamp origin, TimeUnit time_unit) {
    TransactionLog log;
    const auto unit_ms = static_cast<double>(time_unit.count());
    for (std::size_t i = 0; i < sim.customers.size(); ++i) {
        const SimulatedCustomer& cust = sim.customers[i];
        const std::string user = simulated_user_id(i);
        for (std::size_t k = 0; k < cust.times.size(); ++k) {
            const auto offset = std::chrono::milliseconds{std::llround(cust.times[k] * unit_ms)};
            log.push_back({user, user + "-" + std::to_string(k), origin + offset, cust.values[k]});
        }
    }
    return log;
}

} // namespace clvkit
