/**
 * @file rng.hpp
 * @brief Counter-based random streams keyed by (seed, scenario, point, tag).
 *
 * Every random quantity in the pipeline is drawn from a stream whose key is a
 * hash of the identifiers that name it, so results do not depend on iteration
 * order or thread count. Distribution samplers are implemented here rather than
 * taken from <random> because the standard distributions are not bitwise
 * portable across library implementations.
 */
#pragma once

#include <cstdint>
#include <initializer_list>

namespace stonet {

/// Variable tags used when keying streams.
enum class RngTag : std::uint64_t {
    MeanOrientation = 1,
    PoissonLambda,
    RightPressure,
    ScenarioSeed,
    Orientation,
    FractureCount,
    FractureLength,
    FractureAperture,
    ImportanceSample,
    UniformSample,
    WeightInit,
    Shuffle,
    Noise,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Folds a sequence of identifiers into a single 64-bit key.
std::uint64_t hash_key(std::initializer_list<std::uint64_t> parts);

class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}
    CounterRng(std::initializer_list<std::uint64_t> parts) : key_(hash_key(parts)) {}

    std::uint64_t next_u64();
    /// Uniform on [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer on [0, n).
    std::uint64_t below(std::uint64_t n);
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }
    double lognormal(double log_mean, double log_stddev);
    /// Poisson variate by sequential inversion; adequate for lambda up to a few hundred.
    int poisson(double lambda);

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Log-normal parameters (mu, sigma of log X) that reproduce a given mean and std of X.
struct LogNormalParams {
    double log_mean;
    double log_stddev;

    static LogNormalParams from_moments(double mean, double stddev);
};

} // namespace stonet
