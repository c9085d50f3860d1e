#pragma once
// sweep.hpp — parameter sweeps over graph families: exact hitting times in
// both directions, volume-sum estimates, closed forms, relaxation times, and
// log-log exponent fits; plus the lamplighter relaxation-time experiment.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hittimes/families.hpp"
#include "hittimes/simulate.hpp"
#include "json.hpp"

namespace hittimes {

// Size gates for the exact routes inside sweeps: dense spectral work below
// kSpectralCap (spectral.hpp), single-target linear solves up to this cap,
// Monte Carlo beyond.
inline constexpr Index kSweepSolveCap = 200000;

struct SweepQuantities {
    bool exact = true;
    bool volume = true;
    bool closed_form = true;
    bool monte_carlo = false;
    bool trel = false;
    bool resistance = false;
};

using ParamList = std::vector<std::pair<std::string, std::string>>;

struct SweepConfig {
    std::string family;
    std::vector<ParamList> grid;       // one kernel per entry
    SweepQuantities quantities;
    std::uint64_t seed = 1;
    std::uint64_t mc_trials = 2000;
    std::string out_path;              // writes <out>.csv and <out>.json
    std::string fit_x = "diameter";    // diameter | vertices | N | k | side
    Index diameter_exact_threshold = 20000;

    static SweepConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct SweepRow {
    std::size_t grid_index = 0;
    FamilySpec spec;
    Index diameter = 0;
    bool diameter_exact = true;
    double h_xy = 0.0;     // origin -> pole
    double h_yx = 0.0;     // pole -> origin
    double vsum_y = 0.0;   // volume sum at the pole
    double vsum_x = 0.0;   // volume sum at the origin
    std::optional<double> closed_form;   // pole-direction order when one-sided
    std::optional<double> ratio;         // h_xy / vsum_y
    std::optional<double> trel;
    std::optional<double> resistance;
    std::optional<SampleStats> mc;       // origin -> pole
    std::string method;    // "ldlt" | "cg" | "mc" | "error"
    double residual = 0.0;
    std::vector<std::string> notes;
    std::string error;     // nonempty when the row failed

    nlohmann::json to_json() const;
};

struct ExponentFit {
    double slope = 0.0;
    double stderr_slope = 0.0;
    double intercept = 0.0;
    int used = 0;
    bool curvature_flag = false;   // quadratic log-log term > 2x its stderr
    double curvature = 0.0;
    double curvature_stderr = 0.0;
    std::vector<std::string> notes;

    nlohmann::json to_json() const;
};

// Least squares of log(value) on log(size).  Rows with nonpositive values are
// excluded with a note; fewer than 3 usable points is an error.
ExponentFit fit_exponent(std::span<const double> sizes,
                         std::span<const double> values);

struct SweepResult {
    SweepConfig config;
    std::vector<SweepRow> rows;
    std::optional<ExponentFit> fit_xy;   // log h_xy vs log fit_x
    std::optional<ExponentFit> fit_yx;
    double ratio_min = 0.0;              // over rows with exact H and vsum
    double ratio_max = 0.0;

    std::string render_csv(const std::string& timestamp) const;
    nlohmann::json to_json() const;
};

// Runs every grid entry (rows independent, deterministic order and seeds),
// fits exponents, and writes <out>.csv / <out>.json when out_path is set.
SweepResult run_sweep(const SweepConfig& cfg);

// One lamplighter comparison row: relaxation time of the lamp-walk chain
// (lazified by 1/2 before the eigensolve) against the maximal base hitting
// time, plus the volume-sum bound max_x sum_n 1/V_base(x, n^(1/theta)).
struct LamplighterRow {
    std::string base_label;
    Index base_vertices = 0;
    Index diamond_vertices = 0;
    double max_hitting = 0.0;
    double trel = 0.0;
    double ratio = 0.0;        // trel / max_hitting
    double vsum_bound = 0.0;
    bool vertex_transitive = true;
    std::vector<std::string> notes;

    nlohmann::json to_json() const;
};

struct LamplighterResult {
    std::vector<LamplighterRow> rows;

    std::string render_csv(const std::string& timestamp) const;
    nlohmann::json to_json() const;
};

// Bases must stay small (<= 14 vertices): the lamp chain has |V| * 2^|V|
// states.  Non-vertex-transitive bases get a warning note but are computed.
LamplighterResult lamplighter_experiment(const std::vector<Generated>& bases);

}  // namespace hittimes
