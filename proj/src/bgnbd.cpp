#include "clvkit/bgnbd.hpp"

#include "clvkit/kernels.hpp"
#include "clvkit/special_functions.hpp"
#include "clvkit/summation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

namespace clvkit {

namespace {

constexpr double kZ95 = 1.96;

double log_sum_exp(double x, double y) {
    const double m = std::max(x, y);
    if (m == -std::numeric_limits<double>::infinity()) return m;
    return m + std::log(std::exp(x - m) + std::exp(y - m));
}

void check_customer(std::int64_t x, double recency, double age) {
    if (x < 0) throw InputError("frequency must be nonnegative, got " + std::to_string(x));
    if (!(recency >= 0.0) || !(age >= recency) || !std::isfinite(age)) {
        throw InputError("need 0 <= recency <= age, got recency=" + std::to_string(recency) +
                         " age=" + std::to_string(age));
    }
}

// k * ln(1 - p) with the convention 0 * ln(0) = 0.
double log_pow_one_minus(double p, std::int64_t k) {
    if (k == 0) return 0.0;
    return static_cast<double>(k) * std::log1p(-p);
}

double log_poisson(std::int64_t j, double mu) {
    return static_cast<double>(j) * std::log(mu) - mu - ln_gamma(static_cast<double>(j) + 1.0);
}

// P(N >= x) for N ~ Poisson(mu), x >= 1. Sums whichever side avoids cancellation.
double poisson_upper_tail(std::int64_t x, double mu) {
    if (mu < static_cast<double>(x)) {
        long double sum = 0.0L;
        for (std::int64_t j = x;; ++j) {
            const long double term = std::exp(static_cast<long double>(log_poisson(j, mu)));
            sum += term;
            if (term <= 1e-18L * sum || j - x > 100000) break;
        }
        return static_cast<double>(sum);
    }
    long double lower = 0.0L;
    for (std::int64_t j = 0; j < x; ++j) lower += std::exp(static_cast<long double>(log_poisson(j, mu)));
    return static_cast<double>(std::max(0.0L, 1.0L - lower));
}

} // namespace

void BgnbdCoefficients::validate() const {
    for (std::size_t i = 0; i < 4; ++i) {
        const double v = as_array()[i];
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw DomainError(std::string("BG/NBD parameter ") + kBgnbdParameterNames[i] +
                              " must be positive and finite, got " + std::to_string(v));
        }
    }
}

double individual_pmf(const LatentCustomer& customer, std::int64_t x, double t) {
    const double lambda = customer.lambda;
    const double p = customer.p_dropout;
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("individual_pmf: lambda must be positive");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("individual_pmf: p must lie in [0, 1]");
    if (!(t >= 0.0)) throw InputError("individual_pmf: t must be nonnegative");
    if (x < 0) return 0.0;

    const double mu = lambda * t;
    if (mu == 0.0) return x == 0 ? 1.0 : 0.0;

    // Alive after the x-th purchase and exactly x purchases by t.
    const double alive = std::exp(log_pow_one_minus(p, x) + log_poisson(x, mu));
    if (x == 0) return alive;
    // Dropped out right after the x-th purchase, which happened by t (Erlang-x CDF).
    if (p == 0.0) return alive;
    const double died = std::exp(std::log(p) + log_pow_one_minus(p, x - 1)) * poisson_upper_tail(x, mu);
    return alive + died;
}

BgnbdLikelihood::BgnbdLikelihood(const BgnbdCoefficients& c)
    : c_(c), ln_alpha_(std::log(c.alpha)), ln_gamma_r_(ln_gamma(c.r)), ln_beta_ab_(ln_beta(c.a, c.b)) {}

double BgnbdLikelihood::operator()(std::int64_t x, double recency, double age) const {
    check_customer(x, recency, age);
    const double xd = static_cast<double>(x);
    const double rx = c_.r + xd;
    const double common = ln_gamma(rx) - ln_gamma_r_ + c_.r * ln_alpha_ - ln_beta_ab_;
    const double alive = ln_beta(c_.a, c_.b + xd) - rx * std::log(c_.alpha + age);
    if (x == 0) return common + alive;
    const double dropped = ln_beta(c_.a + 1.0, c_.b + xd - 1.0) - rx * std::log(c_.alpha + recency);
    return common + log_sum_exp(alive, dropped);
}

double log_likelihood(const BgnbdCoefficients& coefficients, std::span<const RfmRow> rfm) {
    if (rfm.empty()) throw InputError("log_likelihood: empty RFM table");
    coefficients.validate();
    std::vector<double> terms(rfm.size());
    kernels::bgnbd_terms_parallel(coefficients, rfm, terms);
    return compensated_sum(terms);
}

Objective bgnbd_objective(std::span<const RfmRow> rfm, double penalizer) {
    return [rfm, penalizer, terms = std::make_shared<std::vector<double>>(rfm.size())](std::span<const double> theta) {
        const BgnbdCoefficients c{std::exp(theta[0]), std::exp(theta[1]), std::exp(theta[2]), std::exp(theta[3])};
        for (const double v : c.as_array()) {
            if (!(v > 0.0) || !std::isfinite(v)) return std::numeric_limits<double>::infinity();
        }
        kernels::bgnbd_terms_parallel(c, rfm, *terms);
        double penalty = 0.0;
        for (const double t : theta) penalty += t * t;
        return -compensated_sum(*terms) + penalizer * penalty;
    };
}

BgnbdParams fit_bgnbd(std::span<const RfmRow> rfm, const OptimizerConfig& config, double penalizer) {
    config.validate();
    if (!(penalizer >= 0.0)) throw InputError("penalizer must be nonnegative");
    if (rfm.empty()) throw FitError("fit_bgnbd: empty RFM table", {});
    for (const RfmRow& row : rfm) check_customer(row.frequency, row.recency, row.age);
    if (std::none_of(rfm.begin(), rfm.end(), [](const RfmRow& r) { return r.frequency > 0; })) {
        throw FitError("fit_bgnbd: degenerate data, no customer has a repeat purchase", {});
    }

    const Objective objective = bgnbd_objective(rfm, penalizer);
    const std::array<double, 4> start{0.0, 0.0, 0.0, 0.0};
    const OptimResult opt = nelder_mead(objective, start, config);

    std::vector<double> natural(4);
    for (std::size_t i = 0; i < 4; ++i) natural[i] = std::exp(opt.argmin[i]);
    if (!opt.converged) {
        throw FitError("fit_bgnbd: optimizer did not converge within " + std::to_string(config.max_iterations) +
                           " iterations",
                       natural);
    }

    const Eigen::MatrixXd hessian = numerical_hessian(bgnbd_objective(rfm, 0.0), opt.argmin);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || (ldlt.vectorD().array() <= 0.0).any()) {
        throw FitError("fit_bgnbd: information matrix is not positive definite", natural);
    }
    const Eigen::MatrixXd covariance = ldlt.solve(Eigen::MatrixXd::Identity(4, 4));

    BgnbdParams out;
    out.coefficients = {natural[0], natural[1], natural[2], natural[3]};
    for (std::size_t i = 0; i < 4; ++i) {
        const auto ei = static_cast<Eigen::Index>(i);
        const double se = natural[i] * std::sqrt(covariance(ei, ei));
        out.standard_errors[i] = se;
        out.ci95[i] = {natural[i] - kZ95 * se, natural[i] + kZ95 * se};
    }
    out.log_likelihood = log_likelihood(out.coefficients, rfm);
    out.n_customers = rfm.size();
    out.fit = {config, penalizer, opt.iterations, opt.evaluations, opt.converged};
    return out;
}

double probability_alive(const BgnbdCoefficients& c, std::int64_t x, double recency, double age) {
    c.validate();
    check_customer(x, recency, age);
    if (x == 0) return 1.0;
    const double xd = static_cast<double>(x);
    const double log_odds_dead = std::log(c.a) - std::log(c.b + xd - 1.0) +
                                 (c.r + xd) * (std::log(c.alpha + age) - std::log(c.alpha + recency));
    return 1.0 / (1.0 + std::exp(log_odds_dead));
}

double conditional_expected_transactions(const BgnbdCoefficients& c, double horizon, std::int64_t x, double recency,
                                         double age, const WarningHandler& on_warning) {
    c.validate();
    check_customer(x, recency, age);
    if (!(horizon >= 0.0)) throw InputError("horizon must be nonnegative");
    if (c.a == 1.0) throw DomainError("conditional_expected_transactions: a == 1 makes the expectation 0/0");
    if (c.a < 1.0) {
        warn(on_warning, "a = " + std::to_string(c.a) + " < 1: conditional expectation may be numerically unstable");
    }
    if (horizon == 0.0) return 0.0;

    const double xd = static_cast<double>(x);
    const double z = horizon / (c.alpha + age + horizon);
    // (1-z)^(r+x) 2F1(r+x, b+x; a+b+x-1; z) rewritten by Euler's transformation, which keeps the
    // hypergeometric factor bounded as x grows.
    const double hyp = hyp2f1(c.a + c.b - 1.0 - c.r, c.a - 1.0, c.a + c.b + xd - 1.0, z);
    const double log_scale = (c.a - 1.0) * std::log1p(-z);
    const double bracket = -std::expm1(log_scale) - std::exp(log_scale) * (hyp - 1.0);
    const double numerator = (c.a + c.b + xd - 1.0) / (c.a - 1.0) * bracket;

    double denominator = 1.0;
    if (x > 0) {
        denominator += std::exp(std::log(c.a) - std::log(c.b + xd - 1.0) +
                                (c.r + xd) * (std::log(c.alpha + age) - std::log(c.alpha + recency)));
    }
    return std::max(0.0, numerator / denominator);
}

double expected_transactions(const BgnbdCoefficients& c, double t) {
    c.validate();
    if (c.a == 1.0) throw DomainError("expected_transactions: undefined at a == 1");
    if (!(t >= 0.0)) throw InputError("expected_transactions: t must be nonnegative");
    if (t == 0.0) return 0.0;
    const double z = t / (c.alpha + t);
    const double hyp = hyp2f1(c.r, c.b, c.a + c.b - 1.0, z);
    const double bracket = 1.0 - std::pow(c.alpha / (c.alpha + t), c.r) * hyp;
    return std::max(0.0, (c.a + c.b - 1.0) / (c.a - 1.0) * bracket);
}

FrequencyRecencyMatrix frequency_recency_matrix(const BgnbdCoefficients& c, const MatrixSpec& spec) {
    c.validate();
    if (spec.max_frequency < 0 || !(spec.max_recency >= 0.0) || !(spec.recency_step > 0.0) || !(spec.age > 0.0)) {
        throw InputError("frequency_recency_matrix: grid bounds must be positive");
    }
    if (spec.mode == MatrixMode::expected_purchases && !(spec.horizon > 0.0)) {
        throw InputError("frequency_recency_matrix: expected_purchases mode needs a positive horizon");
    }
    FrequencyRecencyMatrix m;
    const auto n_rows = static_cast<std::size_t>(std::floor(spec.max_recency / spec.recency_step + 1e-9)) + 1;
    for (std::size_t i = 0; i < n_rows; ++i) m.recency.push_back(static_cast<double>(i) * spec.recency_step);
    for (std::int64_t x = 0; x <= spec.max_frequency; ++x) m.frequency.push_back(x);
    m.cells.reserve(n_rows * m.frequency.size());
    for (const double tx : m.recency) {
        for (const std::int64_t x : m.frequency) {
            if (tx > spec.age) {
                m.cells.emplace_back(std::nullopt);
            } else if (spec.mode == MatrixMode::p_alive) {
                m.cells.emplace_back(probability_alive(c, x, tx, spec.age));
            } else {
                m.cells.emplace_back(conditional_expected_transactions(c, spec.horizon, x, tx, spec.age));
            }
        }
    }
    return m;
}

} // namespace clvkit
