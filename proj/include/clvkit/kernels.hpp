#pragma once

// Per-customer kernels. Each has a serial reference and an OpenMP version; both write every output
// slot from that slot's inputs alone, so results are bit-identical for any thread count.

#include "clvkit/bgnbd.hpp"
#include "clvkit/gamma_gamma.hpp"
#include "clvkit/predict.hpp"
#include "clvkit/simulate.hpp"

#include <span>

namespace clvkit::kernels {

// out[i] = per-customer log-likelihood; out.size() == rows.size().
void bgnbd_terms_serial(const BgnbdCoefficients& c, std::span<const RfmRow> rows, std::span<double> out);
void bgnbd_terms_parallel(const BgnbdCoefficients& c, std::span<const RfmRow> rows, std::span<double> out);

void gg_terms_serial(const GgCoefficients& c, std::span<const GgObservation> rows, std::span<double> out);
void gg_terms_parallel(const GgCoefficients& c, std::span<const GgObservation> rows, std::span<double> out);

// out[i] = simulate_customer(config, i).
void simulate_serial(const SimulationConfig& config, std::span<SimulatedCustomer> out);
void simulate_parallel(const SimulationConfig& config, std::span<SimulatedCustomer> out);

void predict_serial(const BgnbdParams& bgnbd, const GgParams& gg, std::span<const RfmRow> rows, double horizon,
                    double discount_rate, std::span<CustomerPrediction> out);
void predict_parallel(const BgnbdParams& bgnbd, const GgParams& gg, std::span<const RfmRow> rows, double horizon,
                      double discount_rate, std::span<CustomerPrediction> out);

} // namespace clvkit::kernels
