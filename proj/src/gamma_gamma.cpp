#include "clvkit/gamma_gamma.hpp"

#include "clvkit/kernels.hpp"
#include "clvkit/special_functions.hpp"
#include "clvkit/summation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace clvkit {

namespace {

constexpr double kZ95 = 1.96;

void check_observation(std::int64_t x, double monetary) {
    if (x < 1) throw InputError("gamma-gamma rows need frequency >= 1, got " + std::to_string(x));
    if (!(monetary > 0.0) || !std::isfinite(monetary)) {
        throw InputError("gamma-gamma rows need positive monetary value, got " + std::to_string(monetary));
    }
}

} // namespace

void GgCoefficients::validate() const {
    for (std::size_t i = 0; i < 3; ++i) {
        const double v = as_array()[i];
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw DomainError(std::string("gamma-gamma parameter ") + kGgParameterNames[i] +
                              " must be positive and finite, got " + std::to_string(v));
        }
    }
}

double pearson_correlation(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw InputError("pearson_correlation: sequences differ in length");
    if (xs.size() < 2) throw InputError("pearson_correlation: need at least two points");
    const auto n = static_cast<double>(xs.size());
    const double mx = compensated_sum(xs) / n;
    const double my = compensated_sum(ys) / n;
    long double sxx = 0.0L, syy = 0.0L, sxy = 0.0L;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const long double dx = xs[i] - mx;
        const long double dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0L || syy == 0.0L) throw DomainError("undefined correlation: a sequence has zero variance");
    const double r = static_cast<double>(sxy / std::sqrt(sxx * syy));
    return std::clamp(r, -1.0, 1.0);
}

double gg_customer_log_likelihood(const GgCoefficients& c, std::int64_t x, double monetary) {
    const double xd = static_cast<double>(x);
    const double px = c.p * xd;
    return ln_gamma(px + c.q) - ln_gamma(px) - ln_gamma(c.q) + c.q * std::log(c.gamma) +
           (px - 1.0) * std::log(monetary) + px * std::log(xd) - (px + c.q) * std::log(c.gamma + monetary * xd);
}

double gg_log_likelihood(const GgCoefficients& c, std::span<const GgObservation> rows) {
    c.validate();
    if (rows.empty()) throw InputError("gg_log_likelihood: no rows");
    for (const auto& r : rows) check_observation(r.frequency, r.monetary);
    std::vector<double> terms(rows.size());
    kernels::gg_terms_parallel(c, rows, terms);
    return compensated_sum(terms);
}

std::vector<GgObservation> gg_observations(std::span<const RfmRow> rfm) {
    std::vector<GgObservation> out;
    for (const RfmRow& r : rfm) {
        if (r.frequency >= 1 && r.monetary > 0.0) out.push_back({r.frequency, r.monetary});
    }
    return out;
}

Objective gg_objective(std::span<const GgObservation> rows) {
    return [rows, terms = std::make_shared<std::vector<double>>(rows.size())](std::span<const double> theta) {
        const GgCoefficients c{std::exp(theta[0]), std::exp(theta[1]), std::exp(theta[2])};
        for (const double v : c.as_array()) {
            if (!(v > 0.0) || !std::isfinite(v)) return std::numeric_limits<double>::infinity();
        }
        kernels::gg_terms_parallel(c, rows, *terms);
        return -compensated_sum(*terms);
    };
}

GgParams fit_gg(std::span<const RfmRow> rfm, const OptimizerConfig& config, double correlation_threshold,
                const WarningHandler& on_warning) {
    config.validate();
    const std::vector<GgObservation> rows = gg_observations(rfm);
    if (rows.empty()) throw FitError("fit_gg: no customer with a repeat purchase and positive spend", {});

    GgParams out;
    out.correlation_threshold = correlation_threshold;
    auto record_warning = [&](const std::string& message) {
        out.warnings.push_back(message);
        warn(on_warning, message);
    };

    std::vector<double> freq, money;
    freq.reserve(rows.size());
    money.reserve(rows.size());
    for (const auto& r : rows) {
        freq.push_back(static_cast<double>(r.frequency));
        money.push_back(r.monetary);
    }
    out.sample_mean_monetary = compensated_sum(money) / static_cast<double>(money.size());
    try {
        out.frequency_monetary_correlation = pearson_correlation(freq, money);
        if (std::fabs(out.frequency_monetary_correlation) > correlation_threshold) {
            std::ostringstream msg;
            msg << "frequency/monetary correlation " << out.frequency_monetary_correlation << " exceeds threshold "
                << correlation_threshold << "; the independence assumption of the spend model is questionable";
            record_warning(msg.str());
        }
    } catch (const std::exception& e) {
        out.frequency_monetary_correlation = std::numeric_limits<double>::quiet_NaN();
        record_warning(std::string("frequency/monetary correlation not checked: ") + e.what());
    }

    const Objective objective = gg_objective(rows);
    const std::array<double, 3> start{0.0, 0.0, 0.0};
    const OptimResult opt = nelder_mead(objective, start, config);
    std::vector<double> natural(3);
    for (std::size_t i = 0; i < 3; ++i) natural[i] = std::exp(opt.argmin[i]);
    if (!opt.converged) {
        throw FitError("fit_gg: optimizer did not converge within " + std::to_string(config.max_iterations) +
                           " iterations",
                       natural);
    }

    const Eigen::MatrixXd hessian = numerical_hessian(objective, opt.argmin);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || (ldlt.vectorD().array() <= 0.0).any()) {
        throw FitError("fit_gg: information matrix is not positive definite", natural);
    }
    const Eigen::MatrixXd covariance = ldlt.solve(Eigen::MatrixXd::Identity(3, 3));

    out.coefficients = {natural[0], natural[1], natural[2]};
    for (std::size_t i = 0; i < 3; ++i) {
        const auto ei = static_cast<Eigen::Index>(i);
        const double se = natural[i] * std::sqrt(covariance(ei, ei));
        out.standard_errors[i] = se;
        out.ci95[i] = {natural[i] - kZ95 * se, natural[i] + kZ95 * se};
    }
    out.log_likelihood = -opt.objective_value;
    out.n_customers = rows.size();
    out.fit = {config, 0.0, opt.iterations, opt.evaluations, opt.converged};
    return out;
}

double conditional_mean_transaction_value(const GgCoefficients& c, std::int64_t x, double monetary) {
    c.validate();
    check_observation(x, monetary);
    const double xd = static_cast<double>(x);
    const double denom = c.p * xd + c.q - 1.0;
    if (!(denom > 0.0)) throw DomainError("conditional mean spend needs p*x + q > 1");
    return c.p * (c.gamma + xd * monetary) / denom;
}

double population_mean_transaction_value(const GgCoefficients& c) {
    c.validate();
    if (!(c.q > 1.0)) throw DomainError("population mean spend is infinite for q <= 1");
    return c.gamma * c.p / (c.q - 1.0);
}

double posterior_ratio_literal(const GgCoefficients& c, std::int64_t x, double lambda_coeff) {
    return (c.p + static_cast<double>(x)) / (c.q + lambda_coeff);
}

} // namespace clvkit
