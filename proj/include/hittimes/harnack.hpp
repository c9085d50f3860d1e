#pragma once
// harnack.hpp — numeric certification of a reversible kernel: ellipticity,
// volume doubling, Poincaré constants on sampled balls, spectral-gap scaling
// (1-beta_1)*D^theta, and fitted two-sided heat-kernel envelopes.

#include <cstdint>
#include <string>
#include <vector>

#include "hittimes/kernel.hpp"
#include "hittimes/spectral.hpp"
#include "json.hpp"

namespace hittimes {

// Shared grid of exponential-rate constants used when fitting the envelope.
inline constexpr double kEnvelopeRateGrid[] = {0.05, 0.1, 0.2, 0.5, 1.0};

struct HarnackOptions {
    int balls = 20;                       // Poincaré ball sample size
    int envelope_sample = 200;            // target number of (x, y, n) rows
    std::uint64_t envelope_step_budget = 20000;  // max kernel applications/source
    Index poincare_cap = 1000;            // dense eigensolve cap per ball
    Index doubling_exact_threshold = 20000;  // all-source below, sampled above
    Index doubling_source_cap = 2000;     // sources used when sampling
    double target_reach = 3.0;            // targets within reach * n^{1/theta}
    std::uint64_t seed = 12022481;        // deterministic sampling streams
};

// One evaluated heat-kernel sample row: k^n(x,y), k^{n+1}(x,y), the distance
// d(x,y) and the ball volume V(x, floor(n^{1/theta})).
struct EnvelopePoint {
    Index x = 0;
    Index y = 0;
    std::uint64_t n = 0;
    Index dist = 0;
    double kn = 0.0;
    double kn1 = 0.0;
    double volume = 0.0;
};

struct EnvelopeFit {
    std::vector<double> rate_grid;   // shared exponents for upper and lower
    std::vector<double> upper_c1;    // smallest C1 per rate making k^n bound hold
    std::vector<double> lower_c1;    // largest c1 per rate below k^n + k^{n+1}
    std::size_t sample_size = 0;
    std::size_t lower_eligible = 0;  // rows with d(x,y) <= n
    std::size_t upper_violations = 0;  // recount at the fitted constants
    std::size_t lower_violations = 0;
    std::uint64_t steps_used = 0;

    nlohmann::json to_json() const;
};

struct HarnackCertificate {
    double p0 = 0.0;          // min K(x,y) over off-diagonal edges
    double doubling = 0.0;    // max V(x,2r)/V(x,r) over the sampled grid
    double poincare = 0.0;    // max over sampled balls of 1/(r^theta lambda_1(B))
    int poincare_balls = 0;   // balls actually eigensolved
    int poincare_skipped = 0;
    double gap_product = 0.0;  // (1 - beta_1) * D^theta
    double beta1 = 0.0;
    double diameter = 0.0;
    bool diameter_exact = true;
    double theta = 2.0;
    EnvelopeFit envelope;

    nlohmann::json to_json() const;
};

// Smallest off-diagonal transition probability over edges with positive
// conductance.  Diagonal (laziness) entries are not edges for this purpose.
double ellipticity(const MarkovKernel& k);

// Max over (x, r) of V(x,2r)/V(x,r), r ranging over powers of two up to the
// diameter.  All sources when the graph is small; a deterministic sample of
// source vertices otherwise.
double doubling_constant(const MarkovKernel& k,
                         Index exact_threshold = 20000,
                         Index source_cap = 2000,
                         std::uint64_t seed = 12022481);

// Per-ball optimal Poincaré constants 1/(r^theta lambda_1(B)), where
// lambda_1(B) is the smallest nonzero eigenvalue of the Dirichlet form
// sum over ordered adjacent pairs in B of |f(xi)-f(zeta)|^2 K(xi,zeta) pi(xi)
// against sum over B of |f - f_B|^2 pi, restricted to pi|_B-mean-zero f.
struct PoincareReport {
    double c_p = 0.0;   // max over evaluated balls
    int evaluated = 0;
    int skipped = 0;    // balls larger than the dense cap
    std::vector<double> per_ball;  // one optimal constant per evaluated ball
};
PoincareReport poincare_profile(const MarkovKernel& k, double theta,
                                int balls = 20, Index cap = 1000,
                                std::uint64_t seed = 12022481);

// (1 - beta_1) * D^theta, from precomputed spectral data or power iteration.
double spectral_gap_check(const SpectralData& sd, double diameter, double theta);
double spectral_gap_check(const MarkovKernel& k, double diameter, double theta);

// Evaluates k^n(x,y) = K^n(x,y)/pi(y) by repeated sparse application to
// delta_x, on a geometric n-grid capped at min(10 D^theta, step budget), with
// targets drawn from distance shells within reach * n^{1/theta}.  Fits the
// smallest C1 (upper) and largest c1 (lower, rows with d <= n) for every rate
// in kEnvelopeRateGrid, then recounts violations at the fitted constants.
EnvelopeFit heat_kernel_envelope(const MarkovKernel& k, double theta,
                                 double diameter, const HarnackOptions& opt,
                                 std::vector<EnvelopePoint>* rows = nullptr);

// Full certificate on the kernel as given (callers wanting the lazy-chain
// reading should lazify first).  A nonnegative known_diameter skips the BFS
// diameter computation and is reported as exact.
HarnackCertificate harnack_certificate(const MarkovKernel& k, double theta,
                                       const HarnackOptions& opt = {},
                                       double known_diameter = -1.0);

// Late-time decay fit: m(n) = max_y |k^n(x,y) - 1| over a couple of sources,
// sampled at n = round(c * D^theta) for c in {1, 1.5, 2, 3, 4}; least-squares
// fit of log m(n) = log C - c_rate * (n / D^theta).
struct MixingDecayFit {
    std::vector<std::uint64_t> ns;
    std::vector<double> values;   // m(n)
    double big_c = 0.0;
    double rate = 0.0;            // positive when |k^n - 1| decays
};
MixingDecayFit mixing_decay_fit(const MarkovKernel& k, double theta,
                                double diameter);

}  // namespace hittimes
