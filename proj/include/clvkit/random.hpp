#pragma once

#include <cstdint>
#include <random>
#include <variant>
#include <vector>

namespace clvkit {

/// Seeded random stream over std::mt19937_64 (a standard-specified bit sequence).
///
/// The samplers are written out here rather than taken from <random>, whose
/// distributions are implementation-defined, so a seed reproduces the same draws
/// on every platform:
///   uniform      53 random bits scaled to [0, 1)
///   exponential  inversion, -log(1 - u) / rate
///   normal       Box-Muller, one output per pair of uniforms
///   gamma        Marsaglia-Tsang squeeze/rejection for shape >= 1; for shape < 1,
///                draw Gamma(shape + 1) and multiply by u^(1/shape)
///   beta         X / (X + Y) with X ~ Gamma(a), Y ~ Gamma(b)
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    double uniform();
    double exponential(double rate);
    double normal();
    /// Gamma with the given shape and RATE (mean shape / rate).
    double gamma(double shape, double rate);
    double beta(double a, double b);

private:
    std::mt19937_64 engine_;
};

/// Sub-seed for stream `index` of a run seeded with `seed` (splitmix64 finalizer on both).
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

struct GammaDist {
    double shape;
    double rate;
};
struct BetaDist {
    double a;
    double b;
};
struct ExponentialDist {
    double rate;
};
struct UniformDist {};

using DistributionSpec = std::variant<GammaDist, BetaDist, ExponentialDist, UniformDist>;

/// n independent draws from `spec`. Throws DomainError on nonpositive parameters.
[[nodiscard]] std::vector<double> rng_draws(std::uint64_t seed, const DistributionSpec& spec, std::size_t n);

} // namespace clvkit
