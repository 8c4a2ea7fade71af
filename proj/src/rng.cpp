#include "stonet/rng.hpp"

#include <cmath>
#include <numbers>

namespace stonet {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_key(std::initializer_list<std::uint64_t> parts)
{
    std::uint64_t h = 0x6A09E667F3BCC909ULL;
    for (auto p : parts)
        h = splitmix64(h ^ splitmix64(p));
    return h;
}

std::uint64_t CounterRng::next_u64()
{
    return splitmix64(key_ ^ splitmix64(counter_++ + 0xD1B54A32D192ED03ULL));
}

double CounterRng::uniform()
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t CounterRng::below(std::uint64_t n)
{
    // Rejection keeps the result exactly uniform.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do {
        r = next_u64();
    } while (r >= limit);
    return r % n;
}

double CounterRng::normal()
{
    // Box-Muller; u1 in (0, 1] so the log is finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double CounterRng::lognormal(double log_mean, double log_stddev)
{
    return std::exp(normal(log_mean, log_stddev));
}

int CounterRng::poisson(double lambda)
{
    if (lambda <= 0.0)
        return 0;
    const double u = uniform();
    double p = std::exp(-lambda);
    double cdf = p;
    int k = 0;
    while (u >= cdf && k < 100000) {
        ++k;
        p *= lambda / k;
        cdf += p;
        if (p == 0.0 && cdf < u)
            break;
    }
    return k;
}

LogNormalParams LogNormalParams::from_moments(double mean, double stddev)
{
    const double var_log = std::log1p((stddev / mean) * (stddev / mean));
    return {std::log(mean) - 0.5 * var_log, std::sqrt(var_log)};
}

} // namespace stonet
