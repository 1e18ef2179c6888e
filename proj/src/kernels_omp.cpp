#include "clvkit/kernels.hpp"

#include <exception>
#include <mutex>

namespace clvkit::kernels {

namespace {

// Runs body(i) for i in [0, n) across threads. The exception from the lowest failing index is rethrown.
template <typename Body>
void parallel_for(std::size_t n, Body body) {
    std::exception_ptr first_error;
    std::size_t first_index = n;
    std::mutex guard;
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            const std::lock_guard lock(guard);
            if (static_cast<std::size_t>(i) < first_index) {
                first_index = static_cast<std::size_t>(i);
                first_error = std::current_exception();
            }
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

void check_sizes(std::size_t in, std::size_t out) {
    if (in != out) throw InputError("kernel output size does not match input size");
}

} // namespace

void bgnbd_terms_parallel(const BgnbdCoefficients& c, std::span<const RfmRow> rows, std::span<double> out) {
    check_sizes(rows.size(), out.size());
    const BgnbdLikelihood lik(c);
    parallel_for(rows.size(), [&](std::size_t i) { out[i] = lik(rows[i].frequency, rows[i].recency, rows[i].age); });
}

void gg_terms_parallel(const GgCoefficients& c, std::span<const GgObservation> rows, std::span<double> out) {
    check_sizes(rows.size(), out.size());
    parallel_for(rows.size(), [&](std::size_t i) {
        out[i] = gg_customer_log_likelihood(c, rows[i].frequency, rows[i].monetary);
    });
}

void simulate_parallel(const SimulationConfig& config, std::span<SimulatedCustomer> out) {
    parallel_for(out.size(), [&](std::size_t i) { out[i] = simulate_customer(config, i); });
}

void predict_parallel(const BgnbdParams& bgnbd, const GgParams& gg, std::span<const RfmRow> rows, double horizon,
                      double discount_rate, std::span<CustomerPrediction> out) {
    check_sizes(rows.size(), out.size());
    parallel_for(rows.size(),
                 [&](std::size_t i) { out[i] = predict_customer(bgnbd, gg, rows[i], horizon, discount_rate); });
}

} // namespace clvkit::kernels
