// test_util.hpp — shared fixtures: deterministic random kernels and small
// dense oracles used across the test binaries.
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hittimes/kernel.hpp"
#include "hittimes/simulate.hpp"

namespace hittimes::testutil {

// Random connected conductance graph: a random spanning tree plus `extra`
// random chords, weights in [0.5, 2.5], optional self-loops.  Deterministic
// for a fixed seed.
inline MarkovKernel random_kernel(std::uint64_t seed, Index n, int extra,
                                  bool self_loops = false) {
    SplitMix64 rng(seed);
    std::map<std::pair<Index, Index>, double> weight;
    for (Index v = 1; v < n; ++v) {
        Index u = static_cast<Index>(rng.next() % static_cast<std::uint64_t>(v));
        weight[{u, v}] += 0.5 + 2.0 * rng.uniform();
    }
    for (int i = 0; i < extra; ++i) {
        Index u = static_cast<Index>(rng.next() % static_cast<std::uint64_t>(n));
        Index v = static_cast<Index>(rng.next() % static_cast<std::uint64_t>(n));
        if (u == v) continue;
        weight[{std::min(u, v), std::max(u, v)}] += 0.5 + 2.0 * rng.uniform();
    }
    if (self_loops)
        for (Index v = 0; v < n; ++v)
            if (rng.uniform() < 0.3) weight[{v, v}] += 0.5 + rng.uniform();
    std::vector<WeightedEdge> edges;
    for (const auto& [uv, w] : weight) edges.push_back({uv.first, uv.second, w});
    return MarkovKernel::from_conductances(n, edges);
}

// Dense row-stochastic matrix of a kernel (oracle-side representation).
inline Eigen::MatrixXd dense_transition(const MarkovKernel& k) {
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(k.size(), k.size());
    for (Index x = 0; x < k.size(); ++x)
        for (Index y = 0; y < k.size(); ++y) K(x, y) = k.transition(x, y);
    return K;
}

// Hitting times into `target` by dense full-pivot LU on (I - K) restricted to
// the complement — an independent oracle for both production routes.
inline Eigen::VectorXd dense_hitting_oracle(const MarkovKernel& k, Index target) {
    const Index n = k.size();
    Eigen::MatrixXd K = dense_transition(k);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n - 1, n - 1);
    Eigen::VectorXd b = Eigen::VectorXd::Ones(n - 1);
    auto idx = [&](Index v) { return v < target ? v : v - 1; };
    for (Index x = 0; x < n; ++x) {
        if (x == target) continue;
        for (Index y = 0; y < n; ++y) {
            if (y == target) continue;
            A(idx(x), idx(y)) = (x == y ? 1.0 : 0.0) - K(x, y);
        }
    }
    Eigen::VectorXd h = A.fullPivLu().solve(b);
    Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
    for (Index x = 0; x < n; ++x)
        if (x != target) full[x] = h[idx(x)];
    return full;
}

}  // namespace hittimes::testutil
