#include "clvkit/random.hpp"

#include "clvkit/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace clvkit {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError(std::string(what) + " must be positive and finite, got " + std::to_string(v));
    }
}

} // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

double RandomStream::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::exponential(double rate) {
    require_positive(rate, "exponential rate");
    return -std::log1p(-uniform()) / rate;
}

double RandomStream::normal() {
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double RandomStream::gamma(double shape, double rate) {
    require_positive(shape, "gamma shape");
    require_positive(rate, "gamma rate");
    if (shape < 1.0) {
        const double boosted = gamma(shape + 1.0, 1.0);
        const double u = 1.0 - uniform();
        return boosted * std::pow(u, 1.0 / shape) / rate;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = 0.0;
        double v = 0.0;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
        if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
}

double RandomStream::beta(double a, double b) {
    require_positive(a, "beta a");
    require_positive(b, "beta b");
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    const double s = x + y;
    // Both gammas can underflow to zero for tiny shapes; fall back on the relative shape.
    if (s == 0.0) return uniform() < a / (a + b) ? 1.0 : 0.0;
    return x / s;
}

std::vector<double> rng_draws(std::uint64_t seed, const DistributionSpec& spec, std::size_t n) {
    RandomStream stream(seed);
    std::vector<double> out;
    out.reserve(n);
    std::visit(
        [&](const auto& d) {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, GammaDist>) {
                require_positive(d.shape, "gamma shape");
                require_positive(d.rate, "gamma rate");
                for (std::size_t i = 0; i < n; ++i) out.push_back(stream.gamma(d.shape, d.rate));
            } else if constexpr (std::is_same_v<D, BetaDist>) {
                require_positive(d.a, "beta a");
                require_positive(d.b, "beta b");
                for (std::size_t i = 0; i < n; ++i) out.push_back(stream.beta(d.a, d.b));
            } else if constexpr (std::is_same_v<D, ExponentialDist>) {
                require_positive(d.rate, "exponential rate");
                for (std::size_t i = 0; i < n; ++i) out.push_back(stream.exponential(d.rate));
            } else {
                for (std::size_t i = 0; i < n; ++i) out.push_back(stream.uniform());
            }
        },
        spec);
    return out;
}

} // namespace clvkit
