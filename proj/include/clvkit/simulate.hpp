#pragma once

#include "clvkit/bgnbd.hpp"
#include "clvkit/gamma_gamma.hpp"
#include "clvkit/ingest.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace clvkit {

struct SimulationConfig {
    std::size_t n_customers{0};
    double horizon{1.0};
    BgnbdCoefficients bgnbd{};
    std::optional<GgCoefficients> spend{};
    std::uint64_t seed{0};

    void validate() const;
};

struct SimulatedCustomer {
    LatentCustomer latent;
    /// Per-customer spend rate nu; NaN when the simulation has no spend model.
    double spend_rate{0.0};
    /// Purchase times in [0, horizon); the first is the acquisition at 0.
    std::vector<double> times;
    /// Value of each purchase; zero without a spend model.
    std::vector<double> values;
};

struct Simulation {
    double horizon{0.0};
    std::vector<SimulatedCustomer> customers;
};

/// One customer from its own sub-stream derive_seed(seed, index):
/// lambda ~ Gamma(r, rate alpha), p ~ Beta(a, b), acquisition at 0, exponential(lambda) gaps,
/// dropout with probability p after every repeat purchase, purchases kept while t < horizon.
/// With a spend model, nu ~ Gamma(q, rate gamma) and each value ~ Gamma(p, rate nu).
[[nodiscard]] SimulatedCustomer simulate_customer(const SimulationConfig& config, std::size_t index);

/// All customers in index order (parallel over customers; identical to the serial result).
[[nodiscard]] Simulation simulate_customers(const SimulationConfig& config);

/// Stable, sortable customer id for a simulated index ("c000000042").
[[nodiscard]] std::string simulated_user_id(std::size_t index);

/// Exact continuous-time statistics of each simulated customer observed up to `observation_end`.
[[nodiscard]] std::vector<RfmRow> simulation_rfm(const Simulation& sim, double observation_end);

/// Continuous-time calibration/holdout split; holdout counts purchases in (calibration_end, observation_end].
[[nodiscard]] std::vector<CalibrationHoldoutRow> simulation_calibration_holdout(const Simulation& sim,
                                                                                double calibration_end,
                                                                                double observation_end);

/// Transaction records with timestamp origin + t * time_unit (rounded to milliseconds).
[[nodiscard]] TransactionLog simulation_transactions(const Simulation& sim, Timestamp origin,
                                                     TimeUnit time_unit = kOneDay);

} // namespace clvkit
