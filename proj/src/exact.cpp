#include "hittimes/exact.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace hittimes {

namespace {

// Graph Laplacian L(u,v) = delta(u,v) s(u) - c(u,v) with one vertex removed
// (self-loops cancel).  Solving against it realizes both hitting times and
// harmonic potentials; the matrix is SPD because the support is connected.
Eigen::SparseMatrix<double> grounded_laplacian(const MarkovKernel& k, Index ground) {
    Index n = k.size();
    auto reduced = [ground](Index u) { return u - (u > ground ? 1 : 0); };
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(n) * 6);
    for (Index u = 0; u < n; ++u) {
        if (u == ground) continue;
        auto cols = k.neighbors(u);
        auto vals = k.conductances(u);
        double offdiag = 0.0;
        for (std::size_t i = 0; i < cols.size(); ++i) {
            Index v = cols[i];
            if (v == u) continue;
            offdiag += vals[i];
            if (v != ground) trips.emplace_back(reduced(u), reduced(v), -vals[i]);
        }
        trips.emplace_back(reduced(u), reduced(u), offdiag);
    }
    Eigen::SparseMatrix<double> L(n - 1, n - 1);
    L.setFromTriplets(trips.begin(), trips.end());
    return L;
}

// Solve L z = b for the grounded Laplacian, direct below the size cap and
// diagonally preconditioned CG above it.
Eigen::VectorXd solve_grounded(const Eigen::SparseMatrix<double>& L,
                               const Eigen::VectorXd& b, SolveStats* stats) {
    if (L.rows() <= kDirectSolveCap) {
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(L);
        if (solver.info() != Eigen::Success)
            throw std::runtime_error("sparse factorization failed");
        if (stats) {
            stats->method = "ldlt";
            stats->iterations = 0;
        }
        return solver.solve(b);
    }
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                             Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg(L);
    cg.setTolerance(1e-12);
    cg.setMaxIterations(20 * L.rows());
    Eigen::VectorXd z = cg.solve(b);
    if (stats) {
        stats->method = "cg";
        stats->iterations = static_cast<int>(cg.iterations());
    }
    return z;
}

double hitting_residual(const MarkovKernel& k, const Eigen::VectorXd& h, Index target) {
    double worst = 0.0, scale = std::max(1.0, h.lpNorm<Eigen::Infinity>());
    for (Index u = 0; u < k.size(); ++u) {
        if (u == target) continue;
        auto cols = k.neighbors(u);
        auto vals = k.conductances(u);
        double kh = 0.0;
        for (std::size_t i = 0; i < cols.size(); ++i)
            kh += vals[i] / k.strength(u) * h[cols[i]];
        worst = std::max(worst, std::abs(h[u] - kh - 1.0));
    }
    return worst / scale;
}

}  // namespace

GreenFunction green_function(const MarkovKernel& k, const SpectralData& s,
                             const PeriodicityInfo& per, Index cap) {
    Index n = k.size();
    if (n > cap)
        throw std::invalid_argument(
            "green_function: dense Green's function is capped at " +
            std::to_string(cap) + " vertices; use green_column");
    // Periodic chains have a simple -1 eigenvalue whose mode is excluded;
    // everything else enters with weight 1/(1-beta_i).
    Index last = per.periodic ? n - 1 : n;
    GreenFunction g;
    g.periodic = per.periodic;
    Eigen::MatrixXd scaled(n, last - 1);
    for (Index i = 1; i < last; ++i)
        scaled.col(i - 1) = s.phi.col(i) / (1.0 - s.beta[i]);
    g.values.noalias() = scaled * s.phi.middleCols(1, last - 1).transpose();
    return g;
}

Eigen::VectorXd green_column(const MarkovKernel& k, const PeriodicityInfo& per,
                             Index y, SolveStats* stats) {
    Index n = k.size();
    double W = k.total_weight();
    // Full singular system: L g = W e_y - s (minus the period-class term for
    // periodic chains); grounded at y, then shifted to the pi-mean-zero gauge.
    Eigen::VectorXd rhs(n);
    for (Index u = 0; u < n; ++u) {
        rhs[u] = -k.strength(u);
        if (per.periodic)
            rhs[u] -= k.strength(u) * (per.same_class(u, y) ? 1.0 : -1.0);
    }
    rhs[y] += W;

    Eigen::SparseMatrix<double> L = grounded_laplacian(k, y);
    Eigen::VectorXd b(n - 1);
    for (Index u = 0; u < n; ++u)
        if (u != y) b[u - (u > y ? 1 : 0)] = rhs[u];
    Eigen::VectorXd z = solve_grounded(L, b, stats);

    Eigen::VectorXd g(n);
    for (Index u = 0; u < n; ++u)
        g[u] = u == y ? 0.0 : z[u - (u > y ? 1 : 0)];
    // Gauge: sum_u pi(u) g(u) = 0.
    double mean = 0.0;
    for (Index u = 0; u < n; ++u) mean += k.strength(u) * g[u];
    mean /= W;
    for (Index u = 0; u < n; ++u) g[u] -= mean;
    return g;
}

double hitting_from_green(const GreenFunction& g, const PeriodicityInfo& per,
                          Index x, Index y) {
    if (x == y) return 0.0;
    double h = g.values(y, y) - g.values(x, y);
    if (per.periodic && !per.same_class(x, y)) h += 1.0;
    return h;
}

Eigen::MatrixXd hitting_matrix(const GreenFunction& g, const PeriodicityInfo& per) {
    Index n = static_cast<Index>(g.values.rows());
    Eigen::MatrixXd H(n, n);
    for (Index y = 0; y < n; ++y) {
        double gyy = g.values(y, y);
        for (Index x = 0; x < n; ++x) {
            double h = x == y ? 0.0 : gyy - g.values(x, y);
            if (x != y && per.periodic && !per.same_class(x, y)) h += 1.0;
            H(x, y) = h;
        }
    }
    return H;
}

Eigen::VectorXd hitting_linear_solve(const MarkovKernel& k, Index target,
                                     SolveStats* stats) {
    Index n = k.size();
    if (target < 0 || target >= n)
        throw std::invalid_argument("hitting_linear_solve: target out of range");
    // Row u of (I-K)h = 1 scaled by s(u) is the grounded Laplacian row
    // against rhs s(u).
    Eigen::SparseMatrix<double> L = grounded_laplacian(k, target);
    Eigen::VectorXd b(n - 1);
    for (Index u = 0; u < n; ++u)
        if (u != target) b[u - (u > target ? 1 : 0)] = k.strength(u);
    SolveStats local;
    Eigen::VectorXd z = solve_grounded(L, b, &local);

    Eigen::VectorXd h(n);
    for (Index u = 0; u < n; ++u)
        h[u] = u == target ? 0.0 : z[u - (u > target ? 1 : 0)];
    local.residual = hitting_residual(k, h, target);
    if (local.residual > kSolveResidualAccept)
        throw std::runtime_error("hitting_linear_solve: residual " +
                                 std::to_string(local.residual) +
                                 " above acceptance threshold");
    if (stats) *stats = local;
    return h;
}

Eigen::VectorXd hitting_via_green_column(const MarkovKernel& k,
                                         const PeriodicityInfo& per, Index y,
                                         SolveStats* stats) {
    Eigen::VectorXd g = green_column(k, per, y, stats);
    Eigen::VectorXd h(k.size());
    for (Index x = 0; x < k.size(); ++x) {
        if (x == y) {
            h[x] = 0.0;
            continue;
        }
        h[x] = g[y] - g[x];
        if (per.periodic && !per.same_class(x, y)) h[x] += 1.0;
    }
    return h;
}

double return_time(const MarkovKernel& k, Index a) {
    if (a < 0 || a >= k.size())
        throw std::invalid_argument("return_time: vertex out of range");
    return 1.0 / k.stationary(a);
}

double effective_resistance(const MarkovKernel& k, Index x, Index y,
                            SolveStats* stats) {
    if (x == y) return 0.0;
    Eigen::SparseMatrix<double> L = grounded_laplacian(k, y);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(k.size() - 1);
    b[x - (x > y ? 1 : 0)] = 1.0;
    Eigen::VectorXd z = solve_grounded(L, b, stats);
    return z[x - (x > y ? 1 : 0)];
}

}  // namespace hittimes
