// estimate.hpp — hitting-time estimates from ball-volume profiles, plus the
// per-family closed forms they are compared against.
//
// The central object is the volume sum at a target y:
//     VS(y) = sum_{0 <= n <= 2 D^theta} 1 / V(y, n^(1/theta)),
// evaluated by grouping the terms with equal integer radius floor(n^(1/theta)).
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hittimes/families.hpp"
#include "hittimes/metric.hpp"

namespace hittimes {

enum class Direction { origin_to_pole, pole_to_origin };

// Radius-grouped evaluation; exactly equal to the literal term-by-term sum.
// Requires theta >= 2 and D >= 1 (and D <= 1e5 so the term count stays an
// exact integer in a double).
double volume_sum(const MetricProfile& profile, double theta, Index diameter);

// max { prod a_i, a_N a_{N-1} log(a_{N-1}/a_{N-2}), a_N^2 } over the sorted
// sides, padded with 1s to at least three entries; log factors below 1 are
// clipped to 1.
double rect_torus_closed_form(std::vector<long long> sides);

// D^alpha (alpha > theta), D^theta log D (alpha = theta), D^theta (alpha <
// theta); log arguments clipped at e.
double ahlfors_closed_form(double alpha, double theta, Index diameter);

// Largest epsilon from the grid for which V(y,r)/pi(y) >= c0 r^(theta+eps)
// holds for all 1 <= r <= ecc with fitted c0 = min_r of the ratio >= 0.01.
struct ThetaFastVerdict {
    bool fast = false;
    double epsilon = 0.0;   // the certified exponent margin, 0 when !fast
    double c0 = 0.0;        // fitted constant at the reported epsilon
    double estimate = 0.0;  // 1 / pi(y), the predicted hitting-time order
};
ThetaFastVerdict theta_fast_check(const MetricProfile& profile, double theta,
                                  std::span<const double> epsilon_grid);

inline constexpr double kThetaFastGrid[] = {0.05, 0.1, 0.25, 0.5, 1.0};

// Closed forms for the trace and birth-death families.  For the planar trace
// both directions share the same order; for the 3d trace only hitting the
// apex (pole_to_origin) is covered.  `note` (optional) flags the boundary
// case where the formula is the volume-sum order rather than a proved
// hitting-time order.
double trace_closed_form(const FamilySpec& spec, Direction dir,
                         std::string* note = nullptr);

// H(N,0): N^(alpha+1) / N^2 log N / N^2 for alpha >/=/< 1;  H(0,N): N^2.
double birth_death_closed_form(double alpha, long long N, Direction dir);

// Two-sided resistance-flavored bound: max of the volume sums at the two
// endpoints.  Requires matching theta and diameter.
struct EstimateReport {
    Index target = 0;
    double theta = 2.0;
    Index diameter = 0;
    bool diameter_exact = true;
    double volume_sum = 0.0;
    std::optional<double> closed_form;
    std::optional<double> exact_hitting;
    std::optional<double> ratio;  // exact_hitting / volume_sum
    std::vector<std::string> notes;
};
double resistance_estimate(const EstimateReport& a, const EstimateReport& b);

}  // namespace hittimes
