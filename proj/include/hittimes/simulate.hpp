// simulate.hpp — Monte Carlo estimates of hitting times and exit behavior.
//
// Determinism contract: every trial draws from its own splitmix64 stream
// keyed by (seed, stream tag, trial index), and per-chunk moment summaries
// are merged in fixed chunk order.  Results are therefore byte-identical
// across thread counts and across runs with the same seed.
#pragma once

#include <cstdint>
#include <string>

#include "hittimes/kernel.hpp"

namespace hittimes {

inline constexpr char kRngAlgorithm[] = "splitmix64";
inline constexpr std::uint64_t kDefaultStepCap = 100'000'000;

struct SampleStats {
    std::uint64_t trials = 0;
    double mean = 0.0;
    double variance = 0.0;   // unbiased sample variance
    double ci_half = 0.0;    // 1.96 * sqrt(variance / trials)
    std::uint64_t cap_hits = 0;
    bool reliable = true;    // cap_hits / trials <= 1e-3
    std::uint64_t seed = 0;
    std::uint64_t cap = 0;
    std::string rng = kRngAlgorithm;
};

// Mean steps to reach `target` from `start` (0 when equal).  Trials that hit
// the step cap contribute the cap value and are counted in cap_hits.
SampleStats sample_hitting(const MarkovKernel& k, Index start, Index target,
                           std::uint64_t trials, std::uint64_t seed,
                           std::uint64_t cap = kDefaultStepCap);

// Sequential reference implementation with identical output (same per-trial
// streams, same merge order); kept for tests and the benchmark.
SampleStats sample_hitting_serial(const MarkovKernel& k, Index start, Index target,
                                  std::uint64_t trials, std::uint64_t seed,
                                  std::uint64_t cap = kDefaultStepCap);

// P(d(x, X_s) > R) with a 95% Wilson interval.
struct TailEstimate {
    double p_hat = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::uint64_t hits = 0;
    std::uint64_t trials = 0;
};
TailEstimate exit_tail(const MarkovKernel& k, Index x, Index radius,
                       std::uint64_t steps, std::uint64_t trials,
                       std::uint64_t seed);

// First exit time of the ball B(x, R); requires the ball to be proper
// (ecc(x) > R).
SampleStats exit_time_stats(const MarkovKernel& k, Index x, Index radius,
                            std::uint64_t trials, std::uint64_t seed,
                            std::uint64_t cap = kDefaultStepCap);

// The keyed per-trial stream; exposed so other components (and tests) can
// reproduce individual trials.
struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t s) : state(s) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97f4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    double uniform() {  // [0, 1)
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }
};

std::uint64_t trial_key(std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t trial);

}  // namespace hittimes
