#include "tpgen/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace tpgen {

double Rng::uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double Rng::normal() {
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    return u * std::sqrt(-2.0 * std::log(s) / s);
}

double Rng::gamma(double shape, double scale) {
    if (shape <= 0.0 || scale <= 0.0)
        throw std::invalid_argument("gamma: shape and scale must be positive");
    if (shape < 1.0) {
        // Boost trick: Gamma(a) = Gamma(a+1) * U^(1/a).
        double u = uniform();
        while (u == 0.0) u = uniform();
        return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
            return d * v * scale;
    }
}

double Rng::beta(double a, double b) {
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    return x / (x + y);
}

int Rng::binomial(int n, double p) {
    int k = 0;
    for (int i = 0; i < n; ++i)
        if (uniform() < p) ++k;
    return k;
}

int Rng::categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0))
        throw std::invalid_argument("categorical: weights must have positive sum");
    double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
}

std::vector<double> Rng::dirichlet(std::span<const double> concentration) {
    std::vector<double> draw(concentration.size());
    double total = 0.0;
    for (std::size_t i = 0; i < concentration.size(); ++i) {
        draw[i] = gamma(concentration[i], 1.0);
        total += draw[i];
    }
    if (total <= 0.0)
        throw std::runtime_error("dirichlet: degenerate draw");
    for (double& v : draw) v /= total;
    return draw;
}

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}
}  // namespace

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
    return splitmix64(splitmix64(base) ^ salt);
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t s1, std::uint64_t s2) {
    return mix_seed(mix_seed(base, s1), s2);
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t s1, std::uint64_t s2,
                       std::uint64_t s3) {
    return mix_seed(mix_seed(base, s1, s2), s3);
}

}  // namespace tpgen
