#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace tpgen {

// Deterministic random source. All samplers are implemented on top of the
// raw 64-bit stream so results are bit-reproducible across platforms and
// standard-library implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi);

    // Standard normal via the Marsaglia polar method.
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Gamma(shape, scale) via Marsaglia-Tsang squeeze.
    double gamma(double shape, double scale);

    double beta(double a, double b);

    double chi_squared(double dof) { return gamma(0.5 * dof, 2.0); }

    // Exact Bernoulli-sum binomial; intended for small n (count statistics).
    int binomial(int n, double p);

    // Index sampled proportionally to non-negative weights (need not sum to 1).
    int categorical(std::span<const double> weights);

    std::vector<double> dirichlet(std::span<const double> concentration);

  private:
    std::mt19937_64 gen_;
};

// SplitMix64-style stream derivation for reproducible sub-seeds.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt);
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t s1, std::uint64_t s2);
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t s1, std::uint64_t s2,
                       std::uint64_t s3);

}  // namespace tpgen
