// exact.hpp — exact expected hitting times and Green's functions.
//
// Two independent routes are kept deliberately:
//  * spectral/Green route:  G(x,y) = sum_{i>=1} phi_i(x) phi_i(y) / (1-beta_i),
//    dropping the -1 eigenvalue when the chain is periodic, and
//    H(x,y) = G(y,y) - G(x,y)  (+1 when x,y lie in different period classes);
//  * linear-solve route:    (I - K) h = 1 on V \ {target}, h(target) = 0.
// Tests and the acceptance suite cross-check one against the other.
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "hittimes/kernel.hpp"
#include "hittimes/metric.hpp"
#include "hittimes/spectral.hpp"

namespace hittimes {

inline constexpr Index kDenseGreenCap = 4000;
inline constexpr Index kDirectSolveCap = 50000;   // unknowns; iterative above
inline constexpr double kSolveResidualAccept = 1e-8;

struct GreenFunction {
    Eigen::MatrixXd values;  // G(x,y), symmetric, pi-weighted rows average 0
    bool periodic = false;
};

struct SolveStats {
    std::string method;      // "ldlt" or "cg"
    double residual = 0.0;   // max-norm defect of (I-K)h = 1, relative
    int iterations = 0;      // 0 for direct
};

// Dense Green's function from a spectral decomposition (size-capped).
GreenFunction green_function(const MarkovKernel& k, const SpectralData& s,
                             const PeriodicityInfo& per, Index cap = kDenseGreenCap);

// Single column G(., y) via one grounded Laplacian solve with the
// pi-mean-zero gauge; works beyond the dense cap and for periodic chains.
Eigen::VectorXd green_column(const MarkovKernel& k, const PeriodicityInfo& per,
                             Index y, SolveStats* stats = nullptr);

double hitting_from_green(const GreenFunction& g, const PeriodicityInfo& per,
                          Index x, Index y);

// All pairs at once: H(x,y) for every x, y.
Eigen::MatrixXd hitting_matrix(const GreenFunction& g, const PeriodicityInfo& per);

// h(x) = E_x[time to hit target]; h(target) = 0.
Eigen::VectorXd hitting_linear_solve(const MarkovKernel& k, Index target,
                                     SolveStats* stats = nullptr);

// Green-route hitting vector H(., y) built from green_column; usable at any
// size and cross-checkable against hitting_linear_solve.
Eigen::VectorXd hitting_via_green_column(const MarkovKernel& k,
                                         const PeriodicityInfo& per, Index y,
                                         SolveStats* stats = nullptr);

// E_a[return time] = 1 / pi(a).
double return_time(const MarkovKernel& k, Index a);

// Effective resistance between x and y in the stored conductance network.
// Cross-check: H(x,y) + H(y,x) = R(x,y) * total_weight().
double effective_resistance(const MarkovKernel& k, Index x, Index y,
                            SolveStats* stats = nullptr);

}  // namespace hittimes
