// metric.hpp — graph metric on the support of a kernel: BFS distance
// profiles, ball volumes, diameter, and period structure.
#pragma once

#include <optional>
#include <vector>

#include "hittimes/kernel.hpp"

namespace hittimes {

// Distances and cumulative ball volumes from one source.
//   dist[y]     = graph distance d(source, y)
//   volumes[r]  = pi(B(source, r)) for 0 <= r <= ecc  (volumes[0] = pi(source),
//                 volumes[ecc] = 1)
struct MetricProfile {
    Index source = 0;
    std::vector<Index> dist;
    std::vector<double> volumes;
    Index ecc = 0;

    // pi(B(source, r)) with r clamped to [0, ecc].
    double volume(Index r) const {
        if (r < 0) r = 0;
        if (r > ecc) r = ecc;
        return volumes[static_cast<std::size_t>(r)];
    }
};

MetricProfile metric_profile(const MarkovKernel& k, Index source);

struct DiameterResult {
    Index value = 0;
    bool exact = false;  // all-source scan completed vs double-sweep lower bound
};

// Exact diameter by an all-source BFS scan when |V| <= exact_threshold
// (OpenMP over sources); otherwise a double-sweep lower bound with
// exact = false.
DiameterResult diameter(const MarkovKernel& k, Index exact_threshold = 20000);

// Serial reference for the all-source scan; used by tests and the benchmark.
DiameterResult diameter_serial(const MarkovKernel& k, Index exact_threshold = 20000);

// Period structure, decided combinatorially:
//  - any positive holding probability K(x,x) > 0  -> aperiodic (witness vertex)
//  - otherwise the chain is periodic (period 2) iff the support graph is
//    bipartite; a BFS 2-coloring gives the classes, and a conflict edge
//    closes an odd cycle which certifies aperiodicity.
struct PeriodicityInfo {
    bool periodic = false;
    std::vector<std::uint8_t> color;    // 2-coloring when periodic
    Index diag_vertex = -1;             // witness: K(x,x) > 0
    std::vector<Index> odd_cycle;       // witness: closed odd walk in support

    bool same_class(Index x, Index y) const {
        return !periodic || color[static_cast<std::size_t>(x)] ==
                                color[static_cast<std::size_t>(y)];
    }
};

PeriodicityInfo periodicity(const MarkovKernel& k);

// Farthest vertex from `from` (ties broken by smallest id); first leg of the
// double sweep, also used to pick canonical pairs.
Index farthest_vertex(const MarkovKernel& k, Index from);

}  // namespace hittimes
