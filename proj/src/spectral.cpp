#include "hittimes/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace hittimes {

SymmetricOperator::SymmetricOperator(const MarkovKernel& k) : n_(k.size()) {
    row_ptr_.assign(static_cast<std::size_t>(n_) + 1, 0);
    std::vector<double> inv_sqrt_s(n_);
    sqrt_pi_.resize(n_);
    for (Index x = 0; x < n_; ++x) {
        inv_sqrt_s[x] = 1.0 / std::sqrt(k.strength(x));
        sqrt_pi_[x] = std::sqrt(k.stationary(x));
    }
    for (Index x = 0; x < n_; ++x)
        row_ptr_[x + 1] = row_ptr_[x] + k.neighbors(x).size();
    col_.resize(row_ptr_[n_]);
    val_.resize(row_ptr_[n_]);
    for (Index x = 0; x < n_; ++x) {
        auto cols = k.neighbors(x);
        auto vals = k.conductances(x);
        for (std::size_t i = 0; i < cols.size(); ++i) {
            col_[row_ptr_[x] + i] = cols[i];
            val_[row_ptr_[x] + i] = vals[i] * inv_sqrt_s[x] * inv_sqrt_s[cols[i]];
        }
    }
}

void SymmetricOperator::apply_serial(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
    y.resize(n_);
    for (Index r = 0; r < n_; ++r) {
        double acc = 0.0;
        for (std::size_t i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i)
            acc += val_[i] * x[col_[i]];
        y[r] = acc;
    }
}

void SymmetricOperator::apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
    y.resize(n_);
#pragma omp parallel for schedule(static)
    for (Index r = 0; r < n_; ++r) {
        double acc = 0.0;
        for (std::size_t i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i)
            acc += val_[i] * x[col_[i]];
        y[r] = acc;
    }
}

SpectralData spectral_decomposition(const MarkovKernel& k, Index cap) {
    Index n = k.size();
    if (n > cap)
        throw std::invalid_argument(
            "spectral_decomposition: graph has " + std::to_string(n) +
            " vertices, above the dense cap " + std::to_string(cap) +
            "; use the linear-solve route");
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
    for (Index x = 0; x < n; ++x) {
        auto cols = k.neighbors(x);
        auto vals = k.conductances(x);
        for (std::size_t i = 0; i < cols.size(); ++i) {
            Index y = cols[i];
            S(x, y) = vals[i] / std::sqrt(k.strength(x) * k.strength(y));
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("spectral_decomposition: eigensolver failed");

    SpectralData out;
    out.beta.resize(n);
    out.phi.resize(n, n);
    // Eigen sorts ascending; flip to descending and convert psi -> phi.
    for (Index i = 0; i < n; ++i) {
        out.beta[i] = es.eigenvalues()[n - 1 - i];
        for (Index x = 0; x < n; ++x)
            out.phi(x, i) =
                es.eigenvectors()(x, n - 1 - i) / std::sqrt(k.stationary(x));
    }
    return out;
}

double second_eigenvalue(const MarkovKernel& k, int max_iters, double tol) {
    SymmetricOperator op(k);
    Index n = op.size();
    const Eigen::VectorXd& u = op.sqrt_pi();  // top eigenvector, unit norm

    // Deterministic start vector, deflated against u.
    Eigen::VectorXd v(n);
    for (Index i = 0; i < n; ++i)
        v[i] = std::cos(0.7 * static_cast<double>(i) + 0.3);
    v -= u.dot(v) * u;
    double nrm = v.norm();
    if (nrm == 0.0) {
        v[0] = 1.0;
        v -= u.dot(v) * u;
        nrm = v.norm();
    }
    v /= nrm;

    // The target is the second-largest eigenvalue (not |.|-largest), so run
    // on the shifted operator S + I whose spectrum is nonnegative.
    Eigen::VectorXd w(n);
    double rayleigh = 0.0, prev = 2.0;
    for (int it = 0; it < max_iters; ++it) {
        op.apply(v, w);
        w += v;                    // (S + I) v
        w -= u.dot(w) * u;         // keep orthogonal to sqrt(pi)
        double wn = w.norm();
        if (wn == 0.0) return -1.0;  // two-point chain: only remaining mode
        w /= wn;
        rayleigh = wn - 1.0;  // v'(S+I)v - 1 since v has unit norm
        if (it % 16 == 15) {
            op.apply(w, v);
            rayleigh = w.dot(v);
            if (std::abs(rayleigh - prev) <= tol * std::max(1.0, std::abs(rayleigh)))
                return rayleigh;
            prev = rayleigh;
        }
        std::swap(v, w);
    }
    return rayleigh;
}

double relaxation_time(const SpectralData& s) {
    double gap = s.gap();
    if (!(gap > 0.0))
        throw std::invalid_argument("relaxation_time: spectral gap is not positive");
    return 1.0 / gap;
}

}  // namespace hittimes
