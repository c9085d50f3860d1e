// test_simulate.cpp — Monte Carlo sampler determinism, agreement with the
// exact solver, and the exit-time / exit-tail functional forms.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "hittimes/exact.hpp"
#include "hittimes/families.hpp"
#include "hittimes/metric.hpp"
#include "hittimes/simulate.hpp"

using namespace hittimes;

namespace {

double ls_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    return num / den;
}

}  // namespace

TEST_CASE("parallel and serial samplers produce identical bits") {
    Generated t = rectangular_torus({8, 8});
    // 10000 trials: two full chunks plus a ragged one.
    SampleStats par = sample_hitting(t.kernel, 0, 27, 10000, 77);
    SampleStats ser = sample_hitting_serial(t.kernel, 0, 27, 10000, 77);
    CHECK(par.trials == ser.trials);
    CHECK(par.mean == ser.mean);
    CHECK(par.variance == ser.variance);
    CHECK(par.ci_half == ser.ci_half);
    CHECK(par.cap_hits == ser.cap_hits);
    CHECK(par.reliable == ser.reliable);

    SampleStats rerun = sample_hitting(t.kernel, 0, 27, 10000, 77);
    CHECK(rerun.mean == par.mean);
    CHECK(rerun.variance == par.variance);

    SampleStats other = sample_hitting(t.kernel, 0, 27, 10000, 78);
    CHECK(other.mean != par.mean);

    CHECK(par.rng == "splitmix64");
    CHECK(par.seed == 77);
    CHECK(par.cap == kDefaultStepCap);
}

TEST_CASE("sampled means match known hitting times") {
    Generated k4 = complete_graph(4);
    SampleStats a = sample_hitting(k4.kernel, 0, 2, 100000, 11);
    CHECK(std::abs(a.mean - 3.0) <=
          3.0 * std::sqrt(a.variance / static_cast<double>(a.trials)));
    CHECK(a.reliable);

    Generated z5 = cycle_graph(5);
    SampleStats b = sample_hitting(z5.kernel, 0, 2, 100000, 11);
    CHECK(std::abs(b.mean - 6.0) <=
          3.0 * std::sqrt(b.variance / static_cast<double>(b.trials)));
}

TEST_CASE("sampler agrees with the linear-solver oracle within 4 CI") {
    struct Cell {
        Generated g;
        Index x, y;
        std::uint64_t trials;
    };
    std::vector<Cell> cells;
    cells.push_back({rectangular_torus({4, 4}), 0, 10, 40000});
    cells.push_back({sierpinski(3), 0, 0, 0});
    cells.back().x = cells.back().g.spec.pole;
    cells.back().y = cells.back().g.spec.origin;
    cells.back().trials = 40000;
    cells.push_back({birth_death_metropolis(2.0, 10), 0, 10, 20000});
    for (const auto& cell : cells) {
        SolveStats st;
        double exact = hitting_linear_solve(cell.g.kernel, cell.y, &st)(cell.x);
        SampleStats mc =
            sample_hitting(cell.g.kernel, cell.x, cell.y, cell.trials, 12022481);
        INFO(cell.g.spec.label());
        CHECK(std::abs(mc.mean - exact) <= 4.0 * mc.ci_half);
        CHECK(mc.reliable);
    }
}

TEST_CASE("degenerate and capped sampling") {
    Generated k4 = complete_graph(4);
    SampleStats same = sample_hitting(k4.kernel, 1, 1, 500, 5);
    CHECK(same.mean == 0.0);
    CHECK(same.variance == 0.0);
    CHECK(same.cap_hits == 0);
    CHECK(same.reliable);

    // cap = 1: every trial ends after one step, hit or not.
    SampleStats capped = sample_hitting(k4.kernel, 0, 2, 3000, 5, 1);
    CHECK(capped.mean == 1.0);
    CHECK(capped.cap_hits > 0);
    CHECK_FALSE(capped.reliable);
    CHECK(capped.cap == 1);

    CHECK_THROWS_AS(sample_hitting(k4.kernel, 0, 7, 100, 5), std::invalid_argument);
    CHECK_THROWS_AS(sample_hitting(k4.kernel, 0, 2, 0, 5), std::invalid_argument);
}

TEST_CASE("exit tail trivial cases") {
    Generated t = rectangular_torus({32, 32});
    TailEstimate zero_steps = exit_tail(t.kernel, 0, 0, 0, 2000, 9);
    CHECK(zero_steps.p_hat == 0.0);
    CHECK(zero_steps.hits == 0);
    CHECK(zero_steps.lo <= 1e-15);  // center - half cancels only up to rounding

    // One hop per step: distance after s steps is at most s.
    TailEstimate lipschitz = exit_tail(t.kernel, 0, 10, 5, 2000, 9);
    CHECK(lipschitz.p_hat == 0.0);
    CHECK(lipschitz.hi < 0.01);
}

TEST_CASE("exit tail decays along R^2/s on the square torus") {
    Generated t = rectangular_torus({32, 32});
    struct Cell {
        Index radius;
        std::uint64_t steps;
        std::uint64_t trials;
    };
    // R^2/s = 4, 9, 16, 25.
    std::vector<Cell> grid = {
        {16, 64, 400000}, {24, 64, 400000}, {28, 49, 1500000}, {30, 36, 1000000}};
    std::vector<TailEstimate> tails;
    for (const auto& c : grid)
        tails.push_back(exit_tail(t.kernel, 0, c.radius, c.steps, c.trials, 4242));

    // Strict decay across the grid.
    for (std::size_t i = 1; i < tails.size(); ++i)
        CHECK(tails[i].p_hat < tails[i - 1].p_hat);

    // Linear envelope in the ratio: fitted slope of log p against R^2/s is
    // at most -0.1 over the resolvable cells.
    std::vector<double> qs, logs;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (tails[i].hits == 0) continue;
        qs.push_back(static_cast<double>(grid[i].radius) *
                     static_cast<double>(grid[i].radius) /
                     static_cast<double>(grid[i].steps));
        logs.push_back(std::log(tails[i].p_hat));
    }
    REQUIRE(qs.size() >= 3);
    CHECK(ls_slope(qs, logs) <= -0.1);

    // Cells too deep to resolve must still be consistent with the decay: the
    // Wilson upper bound stays below the last resolved point.
    for (std::size_t i = 0; i < tails.size(); ++i)
        if (tails[i].hits == 0) CHECK(tails[i].hi < std::exp(logs.back()));

    // Wilson interval sanity on a resolvable cell.
    CHECK(tails[0].lo <= tails[0].p_hat);
    CHECK(tails[0].p_hat <= tails[0].hi);
    CHECK(tails[0].hi <= 1.0);

    TailEstimate rerun = exit_tail(t.kernel, 0, 16, 64, 400000, 4242);
    CHECK(rerun.hits == tails[0].hits);
}

TEST_CASE("exit times grow quadratically in the radius on the cycle") {
    // Leaving B(0,R) means reaching distance R+1, so the line-segment
    // gambler's ruin gives E[T] = (R+1)^2 exactly while R+1 stays below the
    // wrap scale.
    Generated z = cycle_graph(64);
    std::vector<double> lr, lm;
    for (Index r : {4, 8, 16}) {
        SampleStats s = exit_time_stats(z.kernel, 0, r, 20000, 31);
        double expected = static_cast<double>((r + 1) * (r + 1));
        CHECK(std::abs(s.mean - expected) <= 4.0 * s.ci_half);
        CHECK(s.reliable);
        lr.push_back(std::log(static_cast<double>(r)));
        lm.push_back(std::log(s.mean));
    }
    double slope = ls_slope(lr, lm);
    CHECK(slope >= 1.7);
    CHECK(slope <= 2.3);

    SampleStats rerun = exit_time_stats(z.kernel, 0, 4, 20000, 31);
    SampleStats first = exit_time_stats(z.kernel, 0, 4, 20000, 31);
    CHECK(rerun.mean == first.mean);
}

TEST_CASE("exit time lower bound and improper balls") {
    Generated t = rectangular_torus({16, 16});
    SampleStats s = exit_time_stats(t.kernel, 0, 4, 20000, 13);
    CHECK(s.mean >= 2.0);   // R^2 / 8
    CHECK(s.mean >= 5.0);   // Lipschitz floor: R+1 steps minimum

    // B(x,R) covering the whole graph is rejected.
    Generated path = birth_death_metropolis(0.0, 10);
    CHECK_THROWS_AS(exit_time_stats(path.kernel, 0, 10, 100, 1),
                    std::invalid_argument);
    Generated z32 = cycle_graph(32);
    CHECK_THROWS_AS(exit_time_stats(z32.kernel, 0, 16, 100, 1),
                    std::invalid_argument);
}

TEST_CASE("keyed streams behave") {
    SplitMix64 g(123);
    for (int i = 0; i < 1000; ++i) {
        double u = g.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    std::set<std::uint64_t> keys;
    for (std::uint64_t t = 0; t < 512; ++t) keys.insert(trial_key(9, 1, t));
    CHECK(keys.size() == 512);
    CHECK(trial_key(9, 1, 3) == trial_key(9, 1, 3));
    CHECK(trial_key(9, 1, 3) != trial_key(9, 2, 3));
    CHECK(trial_key(9, 1, 3) != trial_key(10, 1, 3));
}
