#include "hittimes/metric.hpp"

#include <omp.h>

#include <algorithm>
#include <stdexcept>

namespace hittimes {

namespace {

// BFS into a caller-provided distance buffer (-1 = unvisited).  Returns the
// eccentricity.  Self-loops are ignored: the metric lives on the support
// graph of off-diagonal entries.
Index bfs(const MarkovKernel& k, Index source, std::vector<Index>& dist,
          std::vector<Index>& queue) {
    std::fill(dist.begin(), dist.end(), Index{-1});
    queue.clear();
    queue.push_back(source);
    dist[source] = 0;
    Index ecc = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        Index x = queue[head];
        Index dx = dist[x];
        auto cols = k.neighbors(x);
        auto vals = k.conductances(x);
        for (std::size_t i = 0; i < cols.size(); ++i) {
            Index y = cols[i];
            if (y == x || vals[i] == 0.0) continue;
            if (dist[y] < 0) {
                dist[y] = dx + 1;
                ecc = std::max(ecc, dist[y]);
                queue.push_back(y);
            }
        }
    }
    return ecc;
}

}  // namespace

MetricProfile metric_profile(const MarkovKernel& k, Index source) {
    if (source < 0 || source >= k.size())
        throw std::invalid_argument("metric_profile: source out of range");
    MetricProfile p;
    p.source = source;
    p.dist.assign(k.size(), -1);
    std::vector<Index> queue;
    queue.reserve(k.size());
    p.ecc = bfs(k, source, p.dist, queue);

    // Shell masses, then prefix sums -> cumulative ball volumes.
    p.volumes.assign(static_cast<std::size_t>(p.ecc) + 1, 0.0);
    for (Index y = 0; y < k.size(); ++y)
        p.volumes[static_cast<std::size_t>(p.dist[y])] += k.stationary(y);
    for (std::size_t r = 1; r < p.volumes.size(); ++r)
        p.volumes[r] += p.volumes[r - 1];
    return p;
}

Index farthest_vertex(const MarkovKernel& k, Index from) {
    std::vector<Index> dist(k.size(), -1);
    std::vector<Index> queue;
    queue.reserve(k.size());
    bfs(k, from, dist, queue);
    Index best = from;
    for (Index y = 0; y < k.size(); ++y)
        if (dist[y] > dist[best]) best = y;
    return best;
}

DiameterResult diameter_serial(const MarkovKernel& k, Index exact_threshold) {
    std::vector<Index> dist(k.size(), -1);
    std::vector<Index> queue;
    queue.reserve(k.size());
    if (k.size() <= exact_threshold) {
        Index d = 0;
        for (Index s = 0; s < k.size(); ++s) d = std::max(d, bfs(k, s, dist, queue));
        return {d, true};
    }
    Index u = farthest_vertex(k, 0);
    return {bfs(k, u, dist, queue), false};
}

DiameterResult diameter(const MarkovKernel& k, Index exact_threshold) {
    if (k.size() > exact_threshold) return diameter_serial(k, exact_threshold);
    Index d = 0;
#pragma omp parallel
    {
        std::vector<Index> dist(k.size(), -1);
        std::vector<Index> queue;
        queue.reserve(k.size());
        Index local = 0;
#pragma omp for schedule(dynamic, 64) nowait
        for (Index s = 0; s < k.size(); ++s)
            local = std::max(local, bfs(k, s, dist, queue));
#pragma omp critical
        d = std::max(d, local);
    }
    return {d, true};
}

PeriodicityInfo periodicity(const MarkovKernel& k) {
    PeriodicityInfo info;
    for (Index x = 0; x < k.size(); ++x)
        if (k.diagonal(x) > 0.0) {
            info.periodic = false;
            info.diag_vertex = x;
            return info;
        }

    // 2-color the support graph; a same-color edge closes an odd cycle.
    std::vector<std::uint8_t> color(k.size(), 2);  // 2 = unvisited
    std::vector<Index> parent(k.size(), -1);
    std::vector<Index> queue;
    queue.reserve(k.size());
    color[0] = 0;
    queue.push_back(0);
    for (std::size_t head = 0; head < queue.size(); ++head) {
        Index x = queue[head];
        auto cols = k.neighbors(x);
        auto vals = k.conductances(x);
        for (std::size_t i = 0; i < cols.size(); ++i) {
            Index y = cols[i];
            if (y == x || vals[i] == 0.0) continue;
            if (color[y] == 2) {
                color[y] = static_cast<std::uint8_t>(1 - color[x]);
                parent[y] = x;
                queue.push_back(y);
            } else if (color[y] == color[x]) {
                // Odd cycle: path(x -> root) + path(y -> root) + edge {x,y}.
                std::vector<Index> px, py;
                for (Index t = x; t >= 0; t = parent[t]) px.push_back(t);
                for (Index t = y; t >= 0; t = parent[t]) py.push_back(t);
                // Trim the common tail (shared ancestors).
                while (px.size() > 1 && py.size() > 1 &&
                       px[px.size() - 1] == py[py.size() - 1] &&
                       px[px.size() - 2] == py[py.size() - 2]) {
                    px.pop_back();
                    py.pop_back();
                }
                info.periodic = false;
                info.odd_cycle.assign(px.begin(), px.end());
                for (auto it = py.rbegin(); it != py.rend(); ++it)
                    if (info.odd_cycle.empty() || info.odd_cycle.back() != *it)
                        info.odd_cycle.push_back(*it);
                return info;
            }
        }
    }
    info.periodic = true;
    info.color = std::move(color);
    return info;
}

}  // namespace hittimes
