#include "clvkit/kernels.hpp"

namespace clvkit::kernels {

namespace {

void check_sizes(std::size_t in, std::size_t out) {
    if (in != out) throw InputError("kernel output size does not match input size");
}

} // namespace

void bgnbd_terms_serial(const BgnbdCoefficients& c, std::span<const RfmRow> rows, std::span<double> out) {
    check_sizes(rows.size(), out.size());
    const BgnbdLikelihood lik(c);
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = lik(rows[i].frequency, rows[i].recency, rows[i].age);
}

void gg_terms_serial(const GgCoefficients& c, std::span<const GgObservation> rows, std::span<double> out) {
    check_sizes(rows.size(), out.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out[i] = gg_customer_log_likelihood(c, rows[i].frequency, rows[i].monetary);
    }
}

void simulate_serial(const SimulationConfig& config, std::span<SimulatedCustomer> out) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = simulate_customer(config, i);
}

void predict_serial(const BgnbdParams& bgnbd, const GgParams& gg, std::span<const RfmRow> rows, double horizon,
                    double discount_rate, std::span<CustomerPrediction> out) {
    check_sizes(rows.size(), out.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = predict_customer(bgnbd, gg, rows[i], horizon, discount_rate);
}

} // namespace clvkit::kernels
