#include "hittimes/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hittimes {

namespace {

double clipped_log(double v) { return std::log(std::max(v, std::exp(1.0))); }

}  // namespace

double volume_sum(const MetricProfile& profile, double theta, Index diameter) {
    if (!(theta >= 2.0))
        throw std::invalid_argument("volume_sum: theta must be >= 2");
    if (diameter < 1 || diameter > 100000)
        throw std::invalid_argument("volume_sum: diameter out of range");

    const double n_max = std::floor(2.0 * std::pow(static_cast<double>(diameter), theta));
    auto radius_of = [theta](double n) {
        return std::floor(std::pow(n, 1.0 / theta));
    };
    // Smallest integer n with radius_of(n) >= r.  The analytic boundary
    // ceil(r^theta) is nudged so grouping agrees exactly with the literal
    // term-by-term sum whatever pow() rounding does.
    auto first_at = [&](double r) {
        double m = std::max(0.0, std::ceil(std::pow(r, theta)));
        while (m > 0.0 && radius_of(m - 1.0) >= r) m -= 1.0;
        while (radius_of(m) < r) m += 1.0;
        return m;
    };

    double total = 0.0;
    const double r_top = radius_of(n_max);
    for (double r = 0.0; r <= r_top; r += 1.0) {
        double lo = first_at(r);
        double hi = std::min(first_at(r + 1.0) - 1.0, n_max);
        if (hi < lo) continue;
        total += (hi - lo + 1.0) / profile.volume(static_cast<Index>(r));
    }
    return total;
}

double rect_torus_closed_form(std::vector<long long> sides) {
    if (sides.empty()) throw std::invalid_argument("empty side list");
    for (long long a : sides)
        if (a < 1) throw std::invalid_argument("sides must be >= 1");
    while (sides.size() < 3) sides.push_back(1);
    std::sort(sides.begin(), sides.end());
    std::size_t m = sides.size();
    double prod = 1.0;
    for (long long a : sides) prod *= static_cast<double>(a);
    double aN = static_cast<double>(sides[m - 1]);
    double aN1 = static_cast<double>(sides[m - 2]);
    double aN2 = static_cast<double>(sides[m - 3]);
    double cross = aN * aN1 * std::max(1.0, std::log(aN1 / aN2));
    return std::max({prod, cross, aN * aN});
}

double ahlfors_closed_form(double alpha, double theta, Index diameter) {
    double D = static_cast<double>(diameter);
    if (std::abs(alpha - theta) <= 1e-9)
        return std::pow(D, theta) * clipped_log(D);
    if (alpha > theta) return std::pow(D, alpha);
    return std::pow(D, theta);
}

ThetaFastVerdict theta_fast_check(const MetricProfile& profile, double theta,
                                  std::span<const double> epsilon_grid) {
    if (epsilon_grid.empty())
        throw std::invalid_argument("theta_fast_check: empty epsilon grid");
    std::vector<double> grid(epsilon_grid.begin(), epsilon_grid.end());
    std::sort(grid.begin(), grid.end(), std::greater<>());

    double pi_y = profile.volumes[0];
    ThetaFastVerdict v;
    v.estimate = 1.0 / pi_y;
    for (double eps : grid) {
        double c0 = std::numeric_limits<double>::infinity();
        for (Index r = 1; r <= profile.ecc; ++r)
            c0 = std::min(c0, (profile.volume(r) / pi_y) /
                                  std::pow(static_cast<double>(r), theta + eps));
        if (c0 >= 0.01) {
            v.fast = true;
            v.epsilon = eps;
            v.c0 = c0;
            return v;
        }
        v.c0 = c0;  // report the last (smallest-epsilon) fit when failing
    }
    return v;
}

double trace_closed_form(const FamilySpec& spec, Direction dir, std::string* note) {
    double N = static_cast<double>(spec.N);
    if (spec.family == "trace2d") {
        if (std::abs(spec.alpha - 1.0) <= 1e-9) return N * N * clipped_log(N);
        return N * N;
    }
    if (spec.family == "trace3d") {
        if (dir == Direction::origin_to_pole)
            throw std::invalid_argument(
                "trace3d closed form covers hitting the apex (pole_to_origin) only");
        double a = spec.alpha, b = spec.beta;
        if (std::abs(a - 0.5) <= 1e-9) {
            if (b > 0.5 + 1e-9) return N * N * std::pow(clipped_log(N), 2.0 * b);
            if (std::abs(b - 0.5) <= 1e-9)
                return N * N * clipped_log(N) * clipped_log(clipped_log(N));
            if (note) *note = "volume-sum order at the alpha=1/2, beta<1/2 boundary";
            return N * N * clipped_log(N);
        }
        if (a < 0.5) return N * N;
        return std::pow(N, 1.0 + 2.0 * a) * std::pow(clipped_log(N), 2.0 * b);
    }
    throw std::invalid_argument("trace_closed_form: not a trace family: " + spec.family);
}

double birth_death_closed_form(double alpha, long long N_, Direction dir) {
    double N = static_cast<double>(N_);
    if (dir == Direction::origin_to_pole) return N * N;
    if (alpha > 1.0 + 1e-9) return std::pow(N, alpha + 1.0);
    if (std::abs(alpha - 1.0) <= 1e-9) return N * N * clipped_log(N);
    return N * N;
}

double resistance_estimate(const EstimateReport& a, const EstimateReport& b) {
    if (a.theta != b.theta || a.diameter != b.diameter)
        throw std::invalid_argument(
            "resistance_estimate: endpoint reports disagree on theta or diameter");
    return std::max(a.volume_sum, b.volume_sum);
}

}  // namespace hittimes
