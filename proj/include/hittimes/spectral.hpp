// spectral.hpp — eigenstructure of a reversible kernel via the symmetric
// conjugate S(x,y) = c(x,y) / sqrt(s(x) s(y)), which shares eigenvalues with
// K.  Eigenfunctions are reported in the pi-orthonormal convention
// phi_i(x) = psi_i(x) / sqrt(pi(x)).
#pragma once

#include <Eigen/Dense>

#include "hittimes/kernel.hpp"

namespace hittimes {

struct SpectralData {
    Eigen::VectorXd beta;  // eigenvalues, descending; beta[0] = 1
    Eigen::MatrixXd phi;   // columns phi_i, pi-orthonormal
    double gap() const { return 1.0 - beta[1]; }
};

inline constexpr Index kSpectralCap = 4000;

// Dense symmetric eigensolve.  Throws std::invalid_argument when the graph
// exceeds `cap` vertices (callers must switch to the linear-solve route).
SpectralData spectral_decomposition(const MarkovKernel& k, Index cap = kSpectralCap);

// Second-largest eigenvalue by power iteration on S with the known top
// eigenvector sqrt(pi) deflated.  Works at any size; `tol` is the relative
// Rayleigh-quotient stall tolerance.
double second_eigenvalue(const MarkovKernel& k, int max_iters = 200000,
                         double tol = 1e-12);

// t_rel = 1 / (1 - beta_1) of an (expected lazified) kernel.
double relaxation_time(const SpectralData& s);

// y = S x for the symmetric conjugate operator; the parallel variant is the
// default, the serial one is the reference used by tests/benchmarks.
struct SymmetricOperator {
    explicit SymmetricOperator(const MarkovKernel& k);
    void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
    void apply_serial(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
    Index size() const { return n_; }
    const Eigen::VectorXd& sqrt_pi() const { return sqrt_pi_; }

private:
    Index n_;
    std::vector<std::size_t> row_ptr_;
    std::vector<Index> col_;
    std::vector<double> val_;  // c(x,y)/sqrt(s(x)s(y))
    Eigen::VectorXd sqrt_pi_;
};

}  // namespace hittimes
