// kernel.hpp — reversible Markov kernels on finite weighted graphs.
//
// A kernel is stored as a symmetric conductance matrix c(x,y) >= 0 in CSR
// form with the diagonal entry always present.  Everything else is derived:
//
//   strength  s(x) = sum_y c(x,y)        (must be > 0 for every vertex)
//   total     W    = sum_x s(x)
//   kernel    K(x,y) = c(x,y) / s(x)     (row-stochastic)
//   measure   pi(x)  = s(x) / W          (stationary, sums to 1)
//
// Storing conductances rather than probabilities keeps reversibility
// pi(x)K(x,y) = pi(y)K(y,x) exact in floating point and makes the edge-list
// serialization round-trip byte-stable.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hittimes {

using Index = std::int32_t;

struct WeightedEdge {
    Index u = 0;
    Index v = 0;
    double w = 0.0;
};

// Validation tolerances.  Row sums of K are exact up to accumulated rounding;
// reversibility is exact by construction but re-checked on deserialized data.
inline constexpr double kRowSumTol = 1e-12;
inline constexpr double kReversibilityTol = 1e-10;

class MarkovKernel {
public:
    // Build from an undirected conductance list.  Each edge {u,v} may appear
    // once as (u,v) or (v,u); duplicates must carry the same weight (a
    // mismatch is reported with the offending pair).  Self-loops (u == u)
    // give holding probability.  Throws std::invalid_argument on:
    // nonpositive weights, out-of-range ids, weight conflicts, isolated
    // vertices, or a disconnected support graph (component count reported).
    static MarkovKernel from_conductances(Index n, std::span<const WeightedEdge> edges);

    Index size() const { return n_; }

    // CSR row access. Columns are ascending; the diagonal slot always exists.
    std::span<const Index> neighbors(Index x) const;
    std::span<const double> conductances(Index x) const;

    double conductance(Index x, Index y) const;        // c(x,y), 0 if absent
    double transition(Index x, Index y) const;         // K(x,y)
    double transition_at(Index x, std::size_t slot) const; // K over CSR slot
    double stationary(Index x) const { return strength_[x] / total_; }
    double strength(Index x) const { return strength_[x]; }
    double total_weight() const { return total_; }     // sum_{x,y} c(x,y)
    double diagonal(Index x) const;                    // K(x,x)
    std::size_t edge_count() const;                    // off-diagonal pairs {x,y}

    // K_eps = eps*I + (1-eps)*K.  Same stationary measure; eigenvalues map
    // by beta -> eps + (1-eps)*beta.  Requires 0 <= eps < 1.
    MarkovKernel lazify(double eps) const;

    // Plain-text serialization:
    //   vertices N
    //   x y w          (one line per pair x <= y with c(x,y) > 0, sorted)
    // Weights print with max_digits10 so write -> read -> write is
    // byte-identical.
    std::string to_edge_list() const;
    static MarkovKernel from_edge_list(const std::string& text);

    // Structural sanity used by tests: row sums of K, symmetry of c, and
    // detailed balance.  Returns an empty string when all pass.
    std::string validate() const;

private:
    MarkovKernel() = default;
    void finalize_from_triplets(Index n, std::vector<WeightedEdge>&& sym);

    Index n_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<Index> col_;
    std::vector<double> val_;       // conductances
    std::vector<std::size_t> diag_; // CSR slot of (x,x) for each row
    std::vector<double> strength_;
    double total_ = 0.0;
};

}  // namespace hittimes
