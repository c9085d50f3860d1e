#include "hittimes/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hittimes/metric.hpp"

namespace hittimes {

std::uint64_t trial_key(std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t trial) {
    // Two finalizer rounds decorrelate the (seed, stream, trial) key.
    SplitMix64 g(seed ^ (stream * 0xA24BAED4963EE407ull));
    std::uint64_t a = g.next();
    SplitMix64 h(a + trial * 0x9E3479B97F4A7C15ull);
    return h.next();
}

namespace {

// Per-vertex cumulative conductance rows for O(log deg) transition sampling.
struct WalkTable {
    std::vector<std::size_t> row_ptr;
    std::vector<Index> col;
    std::vector<double> cum;        // running sums of c within each row
    std::vector<double> strength;

    explicit WalkTable(const MarkovKernel& k) {
        Index n = k.size();
        row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
        strength.resize(n);
        for (Index x = 0; x < n; ++x) {
            row_ptr[x + 1] = row_ptr[x] + k.neighbors(x).size();
            strength[x] = k.strength(x);
        }
        col.resize(row_ptr[n]);
        cum.resize(row_ptr[n]);
        for (Index x = 0; x < n; ++x) {
            auto cols = k.neighbors(x);
            auto vals = k.conductances(x);
            double run = 0.0;
            for (std::size_t i = 0; i < cols.size(); ++i) {
                run += vals[i];
                col[row_ptr[x] + i] = cols[i];
                cum[row_ptr[x] + i] = run;
            }
        }
    }

    Index step(Index x, SplitMix64& g) const {
        double t = g.uniform() * strength[x];
        const double* lo = cum.data() + row_ptr[x];
        const double* hi = cum.data() + row_ptr[x + 1];
        const double* it = std::upper_bound(lo, hi, t);
        if (it == hi) --it;  // guard the u ~ 1 boundary
        return col[row_ptr[x] + static_cast<std::size_t>(it - lo)];
    }
};

struct Moments {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double v) {
        ++count;
        double d = v - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (v - mean);
    }
    // Chan's pairwise merge; applied in fixed chunk order.
    void merge(const Moments& o) {
        if (o.count == 0) return;
        if (count == 0) {
            *this = o;
            return;
        }
        double d = o.mean - mean;
        std::uint64_t total = count + o.count;
        mean += d * static_cast<double>(o.count) / static_cast<double>(total);
        m2 += o.m2 + d * d * static_cast<double>(count) *
                         static_cast<double>(o.count) / static_cast<double>(total);
        count = total;
    }
};

constexpr std::uint64_t kChunk = 4096;

// Shared chunked driver: run_trial(trial_index) -> (value, capped).  The
// parallel and serial paths share chunk summaries and merge order, so they
// produce identical bits.
template <typename Trial>
SampleStats run_chunked(std::uint64_t trials, std::uint64_t seed,
                        std::uint64_t cap, bool parallel, Trial&& run_trial) {
    std::uint64_t nchunks = (trials + kChunk - 1) / kChunk;
    std::vector<Moments> moments(nchunks);
    std::vector<std::uint64_t> capped(nchunks, 0);

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (std::int64_t c = 0; c < static_cast<std::int64_t>(nchunks); ++c) {
        std::uint64_t lo = static_cast<std::uint64_t>(c) * kChunk;
        std::uint64_t hi = std::min(trials, lo + kChunk);
        for (std::uint64_t t = lo; t < hi; ++t) {
            auto [value, hit_cap] = run_trial(t);
            moments[c].add(value);
            if (hit_cap) ++capped[c];
        }
    }

    Moments total;
    std::uint64_t cap_hits = 0;
    for (std::uint64_t c = 0; c < nchunks; ++c) {
        total.merge(moments[c]);
        cap_hits += capped[c];
    }

    SampleStats s;
    s.trials = trials;
    s.mean = total.mean;
    s.variance = total.count > 1
                     ? total.m2 / static_cast<double>(total.count - 1)
                     : 0.0;
    s.ci_half = total.count > 0
                    ? 1.96 * std::sqrt(s.variance / static_cast<double>(total.count))
                    : 0.0;
    s.cap_hits = cap_hits;
    s.reliable = static_cast<double>(cap_hits) <=
                 1e-3 * static_cast<double>(std::max<std::uint64_t>(trials, 1));
    s.seed = seed;
    s.cap = cap;
    return s;
}

SampleStats hitting_impl(const MarkovKernel& k, Index start, Index target,
                         std::uint64_t trials, std::uint64_t seed,
                         std::uint64_t cap, bool parallel) {
    if (start < 0 || start >= k.size() || target < 0 || target >= k.size())
        throw std::invalid_argument("sample_hitting: vertex out of range");
    if (trials == 0) throw std::invalid_argument("sample_hitting: zero trials");
    WalkTable table(k);
    auto trial = [&](std::uint64_t t) -> std::pair<double, bool> {
        SplitMix64 g(trial_key(seed, 0x48495454ull, t));  // stream tag "HITT"
        Index at = start;
        std::uint64_t steps = 0;
        while (at != target && steps < cap) {
            at = table.step(at, g);
            ++steps;
        }
        return {static_cast<double>(steps), at != target};
    };
    return run_chunked(trials, seed, cap, parallel, trial);
}

}  // namespace

SampleStats sample_hitting(const MarkovKernel& k, Index start, Index target,
                           std::uint64_t trials, std::uint64_t seed,
                           std::uint64_t cap) {
    return hitting_impl(k, start, target, trials, seed, cap, true);
}

SampleStats sample_hitting_serial(const MarkovKernel& k, Index start, Index target,
                                  std::uint64_t trials, std::uint64_t seed,
                                  std::uint64_t cap) {
    return hitting_impl(k, start, target, trials, seed, cap, false);
}

TailEstimate exit_tail(const MarkovKernel& k, Index x, Index radius,
                       std::uint64_t steps, std::uint64_t trials,
                       std::uint64_t seed) {
    if (trials == 0) throw std::invalid_argument("exit_tail: zero trials");
    MetricProfile prof = metric_profile(k, x);
    WalkTable table(k);

    std::uint64_t nchunks = (trials + kChunk - 1) / kChunk;
    std::vector<std::uint64_t> hits(nchunks, 0);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t c = 0; c < static_cast<std::int64_t>(nchunks); ++c) {
        std::uint64_t lo = static_cast<std::uint64_t>(c) * kChunk;
        std::uint64_t hi = std::min(trials, lo + kChunk);
        for (std::uint64_t t = lo; t < hi; ++t) {
            SplitMix64 g(trial_key(seed, 0x5441494Cull, t));  // "TAIL"
            Index at = x;
            for (std::uint64_t s = 0; s < steps; ++s) at = table.step(at, g);
            if (prof.dist[at] > radius) ++hits[c];
        }
    }
    std::uint64_t total = 0;
    for (auto h : hits) total += h;

    TailEstimate e;
    e.hits = total;
    e.trials = trials;
    double n = static_cast<double>(trials);
    double p = static_cast<double>(total) / n;
    e.p_hat = p;
    const double z = 1.959963984540054;  // 95%
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (p + z2 / (2.0 * n)) / denom;
    double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    e.lo = std::max(0.0, center - half);
    e.hi = std::min(1.0, center + half);
    return e;
}

SampleStats exit_time_stats(const MarkovKernel& k, Index x, Index radius,
                            std::uint64_t trials, std::uint64_t seed,
                            std::uint64_t cap) {
    if (trials == 0) throw std::invalid_argument("exit_time_stats: zero trials");
    MetricProfile prof = metric_profile(k, x);
    if (prof.ecc <= radius)
        throw std::invalid_argument(
            "exit_time_stats: B(x," + std::to_string(radius) +
            ") is the whole graph (ecc " + std::to_string(prof.ecc) + ")");
    WalkTable table(k);
    auto trial = [&](std::uint64_t t) -> std::pair<double, bool> {
        SplitMix64 g(trial_key(seed, 0x45584954ull, t));  // "EXIT"
        Index at = x;
        std::uint64_t steps = 0;
        while (prof.dist[at] <= radius && steps < cap) {
            at = table.step(at, g);
            ++steps;
        }
        return {static_cast<double>(steps), prof.dist[at] <= radius};
    };
    return run_chunked(trials, seed, cap, true, trial);
}

}  // namespace hittimes
