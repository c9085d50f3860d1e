// test_harnack.cpp — ellipticity, volume doubling, sampled-ball Poincaré
// constants, spectral-gap scaling, heat-kernel envelopes, and mixing decay.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "hittimes/families.hpp"
#include "hittimes/harnack.hpp"
#include "hittimes/kernel.hpp"
#include "hittimes/metric.hpp"
#include "hittimes/spectral.hpp"

using namespace hittimes;

namespace {

const double kPi = std::acos(-1.0);

// k^n(x, .) by repeated application of K to the delta distribution at x;
// returns the density against pi after `steps` applications.
std::vector<double> heat_density(const MarkovKernel& k, Index x,
                                 std::uint64_t steps) {
    const Index n = k.size();
    std::vector<double> v(n, 0.0), next(n), ratio(n);
    v[x] = 1.0;
    for (std::uint64_t s = 0; s < steps; ++s) {
        for (Index u = 0; u < n; ++u) ratio[u] = v[u] / k.strength(u);
        for (Index y = 0; y < n; ++y) {
            auto cols = k.neighbors(y);
            auto vals = k.conductances(y);
            double acc = 0.0;
            for (std::size_t i = 0; i < cols.size(); ++i)
                acc += vals[i] * ratio[cols[i]];
            next[y] = acc;
        }
        v.swap(next);
    }
    for (Index y = 0; y < n; ++y) v[y] /= k.stationary(y);
    return v;
}

}  // namespace

TEST_CASE("ellipticity over proper edges") {
    CHECK(ellipticity(complete_graph(4).kernel) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    MarkovKernel torus = rectangular_torus({4, 4}).kernel;
    CHECK(ellipticity(torus) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(ellipticity(torus.lazify(0.5)) == doctest::Approx(0.125).epsilon(1e-15));

    // Metropolis birth-death, alpha=2, N=10: the downhill move 1 -> 0 is the
    // smallest edge probability, w_0/(2 w_1) = 1/8.
    MarkovKernel bd = birth_death_metropolis(2.0, 10).kernel;
    CHECK(ellipticity(bd) == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(ellipticity(bd.lazify(0.5)) == doctest::Approx(0.0625).epsilon(1e-12));
}

TEST_CASE("doubling constants per family") {
    // Cycle balls have 2r+1 vertices, so ratios (4r+1)/(2r+1) rise toward 2;
    // on Z_64 the grid peaks at r=8 with 33/17 before saturation.
    CHECK(doubling_constant(cycle_graph(64).kernel) ==
          doctest::Approx(33.0 / 17.0).epsilon(1e-12));
    CHECK(doubling_constant(cycle_graph(128).kernel) <= 2.0);

    CHECK(doubling_constant(rectangular_torus({4, 4}).kernel) ==
          doctest::Approx(2.2).epsilon(1e-12));

    // Gasket ratios approach 3 = 2^(log3/log2) from below as the level grows.
    double st5 = doubling_constant(sierpinski(5).kernel);
    CHECK(st5 >= 2.7);
    CHECK(st5 <= 3.0);
    double st6 = doubling_constant(sierpinski(6).kernel);
    CHECK(st6 >= 3.0);
    CHECK(st6 <= 9.0);

    double vi = doubling_constant(vicsek(3).kernel);
    CHECK(vi >= 2.0);
    CHECK(vi <= 6.0);
}

TEST_CASE("poincare constant of the two-point space") {
    // Single edge: the 2x2 pencil has lambda_1 = 4, so the optimal constant
    // at r = 1 is 1/4.
    std::vector<WeightedEdge> e = {{0, 1, 1.0}};
    MarkovKernel k = MarkovKernel::from_conductances(2, e);
    PoincareReport rep = poincare_profile(k, 2.0, 12);
    CHECK(rep.evaluated == 12);
    CHECK(rep.skipped == 0);
    CHECK(rep.c_p == doctest::Approx(0.25).epsilon(1e-9));
    for (double c : rep.per_ball) CHECK(c == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("poincare constants stay uniform on cycles and square tori") {
    std::vector<double> cps;
    for (long long n : {64, 128, 256}) {
        PoincareReport rep = poincare_profile(cycle_graph(n).kernel, 2.0);
        REQUIRE(rep.evaluated > 0);
        CHECK(rep.c_p >= 0.05);
        CHECK(rep.c_p <= 2.0);
        cps.push_back(rep.c_p);
    }
    CHECK(*std::max_element(cps.begin(), cps.end()) /
              *std::min_element(cps.begin(), cps.end()) <=
          8.0);

    cps.clear();
    for (long long n : {8, 16, 24}) {
        PoincareReport rep =
            poincare_profile(rectangular_torus({n, n}).kernel, 2.0);
        REQUIRE(rep.evaluated > 0);
        cps.push_back(rep.c_p);
    }
    CHECK(*std::max_element(cps.begin(), cps.end()) /
              *std::min_element(cps.begin(), cps.end()) <=
          8.0);
}

TEST_CASE("poincare with theta=2 diagnoses the Vicsek walk dimension") {
    // The Vicsek tree is not 2-Poincaré: with theta = 2 the fitted constants
    // climb as the sampled balls grow.
    PoincareReport rep = poincare_profile(vicsek(3).kernel, 2.0, 20);
    REQUIRE(rep.evaluated >= 10);
    double lo = *std::min_element(rep.per_ball.begin(), rep.per_ball.end());
    CHECK(rep.c_p / lo >= 2.0);

    // With the declared walk dimension the same balls stay bounded.
    double vi_theta = 1.0 + std::log(5.0) / std::log(3.0);
    PoincareReport good = poincare_profile(vicsek(3).kernel, vi_theta, 20);
    REQUIRE(good.evaluated >= 10);
    CHECK(good.c_p < rep.c_p);
}

TEST_CASE("gap product scaling") {
    // Lazy cycle: (1 - beta_1) * (n/2)^2 -> pi^2 / 4.
    for (long long n : {64, 256}) {
        MarkovKernel lazy = cycle_graph(n).kernel.lazify(0.5);
        double product =
            spectral_gap_check(lazy, static_cast<double>(n) / 2.0, 2.0);
        CHECK(product == doctest::Approx(kPi * kPi / 4.0).epsilon(0.02));
    }

    // Dense decomposition and power iteration agree on the product.
    MarkovKernel lazy64 = cycle_graph(64).kernel.lazify(0.5);
    SpectralData sd = spectral_decomposition(lazy64);
    CHECK(spectral_gap_check(sd, 32.0, 2.0) ==
          doctest::Approx(spectral_gap_check(lazy64, 32.0, 2.0)).epsilon(1e-8));

    // Complete graph: theta=2, D=1, so the product is the plain gap 4/3.
    CHECK(spectral_gap_check(complete_graph(4).kernel, 1.0, 2.0) ==
          doctest::Approx(4.0 / 3.0).epsilon(1e-9));
    CHECK(spectral_gap_check(complete_graph(4).kernel, 1.0, 2.0) <= 2.0);

    // Sierpinski ladder with theta = log5/log2: stable within a factor 4.
    double st_theta = std::log(5.0) / std::log(2.0);
    std::vector<double> products;
    for (int k = 2; k <= 6; ++k) {
        Generated g = sierpinski(k);
        double d = static_cast<double>(g.spec.known_diameter);
        double p = spectral_gap_check(g.kernel.lazify(0.5), d, st_theta);
        CHECK(p >= 0.05);
        CHECK(p <= 50.0);
        products.push_back(p);
    }
    CHECK(*std::max_element(products.begin(), products.end()) /
              *std::min_element(products.begin(), products.end()) <=
          4.0);
}

TEST_CASE("heat kernel envelope fits cleanly on the lazy torus") {
    MarkovKernel lazy = rectangular_torus({16, 16}).kernel.lazify(0.5);
    HarnackOptions opt;
    opt.envelope_step_budget = 4000;
    std::vector<EnvelopePoint> rows;
    EnvelopeFit fit = heat_kernel_envelope(lazy, 2.0, 16.0, opt, &rows);

    CHECK(fit.sample_size == rows.size());
    CHECK(fit.sample_size >= 50);
    CHECK(fit.lower_eligible >= 10);
    CHECK(fit.upper_violations == 0);
    CHECK(fit.lower_violations == 0);
    CHECK(fit.steps_used > 0);

    REQUIRE(fit.rate_grid.size() == 5);
    CHECK(std::is_sorted(fit.upper_c1.begin(), fit.upper_c1.end()));
    CHECK(std::is_sorted(fit.lower_c1.begin(), fit.lower_c1.end()));
    for (double c : fit.upper_c1) CHECK(c > 0.0);
    for (double c : fit.lower_c1) CHECK(c > 0.0);

    for (const auto& p : rows) {
        CHECK(p.kn >= 0.0);
        CHECK(p.volume > 0.0);
        CHECK(p.n >= 1);
    }
}

TEST_CASE("envelope constants are stable across torus sizes") {
    HarnackOptions opt;
    opt.envelope_step_budget = 4000;
    std::vector<double> uppers;
    for (long long n : {8, 16, 32}) {
        MarkovKernel lazy = rectangular_torus({n, n}).kernel.lazify(0.5);
        EnvelopeFit fit =
            heat_kernel_envelope(lazy, 2.0, static_cast<double>(n), opt);
        CHECK(fit.upper_violations == 0);
        CHECK(fit.lower_violations == 0);
        uppers.push_back(fit.upper_c1[2]);  // rate 0.2
        // The lower prefactor tracks the deepest sampled tail cell, which the
        // rate grid (capped at 1.0) undershoots, so it is positive and below
        // the upper constant but not size-stable.
        for (std::size_t i = 0; i < fit.rate_grid.size(); ++i) {
            CHECK(fit.lower_c1[i] > 0.0);
            CHECK(fit.lower_c1[i] <= fit.upper_c1[i]);
        }
    }
    // The fitted upper heat-kernel constant is flat across sizes.
    CHECK(*std::max_element(uppers.begin(), uppers.end()) /
              *std::min_element(uppers.begin(), uppers.end()) <=
          4.0);
}

TEST_CASE("on-diagonal heat kernel times ball volume stays bounded") {
    Generated t = rectangular_torus({32, 32});
    MetricProfile prof = metric_profile(t.kernel, 0);
    std::vector<double> products;
    std::uint64_t last = 0;
    std::vector<double> v(t.kernel.size(), 0.0);
    v[0] = 1.0;
    for (std::uint64_t n = 4; n <= 1024; n *= 2) {
        std::vector<double> dens = heat_density(t.kernel, 0, n);
        auto r = static_cast<Index>(std::floor(std::sqrt(static_cast<double>(n))));
        products.push_back(dens[0] * prof.volume(std::min(r, prof.ecc)));
        last = n;
    }
    CHECK(last == 1024);
    for (double p : products) {
        CHECK(p >= 0.5);
        CHECK(p <= 8.0);
    }
    CHECK(*std::max_element(products.begin(), products.end()) /
              *std::min_element(products.begin(), products.end()) <=
          4.0);
}

TEST_CASE("late-time mixing decay on the lazy cycle") {
    MarkovKernel lazy = cycle_graph(32).kernel.lazify(0.5);
    MixingDecayFit fit = mixing_decay_fit(lazy, 2.0, 16.0);
    REQUIRE(fit.ns.size() == 5);
    CHECK(fit.ns.front() == 256);
    CHECK(fit.ns.back() == 1024);
    for (std::size_t i = 1; i < fit.values.size(); ++i)
        CHECK(fit.values[i] < fit.values[i - 1]);
    CHECK(fit.rate > 0.0);
    CHECK(fit.rate >= 1.5);
    CHECK(fit.rate <= 3.5);
    CHECK(fit.big_c > 0.0);
    CHECK(fit.big_c <= 10.0);
}

TEST_CASE("certificate assembly on the lazy small torus") {
    MarkovKernel lazy = rectangular_torus({4, 4}).kernel.lazify(0.5);
    HarnackCertificate cert = harnack_certificate(lazy, 2.0);

    CHECK(cert.p0 == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(cert.doubling == doctest::Approx(2.2).epsilon(1e-12));
    CHECK(cert.poincare > 0.0);
    CHECK(cert.poincare <= 10.0);
    CHECK(cert.poincare_balls > 0);
    CHECK(cert.beta1 == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(cert.gap_product == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(cert.diameter == 4.0);
    CHECK(cert.diameter_exact);
    CHECK(cert.envelope.upper_violations == 0);
    CHECK(cert.envelope.lower_violations == 0);

    // A declared diameter skips the BFS but reports the same certificate.
    HarnackCertificate known = harnack_certificate(lazy, 2.0, {}, 4.0);
    CHECK(known.diameter == cert.diameter);
    CHECK(known.gap_product == doctest::Approx(cert.gap_product).epsilon(1e-12));

    nlohmann::json j = cert.to_json();
    CHECK(j["p0"].get<double>() == cert.p0);
    CHECK(j["gap_product"].get<double>() == cert.gap_product);
    CHECK(j["envelope"]["upper_c1"].size() == 5);
}
