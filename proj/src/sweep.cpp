#include "hittimes/sweep.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "hittimes/estimate.hpp"
#include "hittimes/exact.hpp"
#include "hittimes/metric.hpp"
#include "hittimes/spectral.hpp"

namespace hittimes {

namespace {

constexpr std::uint64_t kSweepStream = 0x53574550ull;  // "SWEP"

std::string fmt(double v) {
    if (!std::isfinite(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v) {
    return v ? fmt(*v) : "";
}

std::string iso_now() {
    std::time_t t = std::time(nullptr);
    char buf[40];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::optional<double> closed_form_for(const FamilySpec& spec,
                                      const MarkovKernel& k, Index diam,
                                      std::vector<std::string>& notes) {
    const std::string& f = spec.family;
    if (f == "torus") return rect_torus_closed_form(spec.sides);
    if (f == "cycle") return rect_torus_closed_form({spec.N});
    if (f == "sierpinski")
        return ahlfors_closed_form(std::log(3.0) / std::log(2.0), spec.theta,
                                   diam);
    if (f == "vicsek")
        return ahlfors_closed_form(std::log(5.0) / std::log(3.0), spec.theta,
                                   diam);
    if (f == "trace2d" || f == "trace3d") {
        std::string note;
        double v = trace_closed_form(spec, Direction::pole_to_origin, &note);
        if (!note.empty()) notes.push_back(note);
        return v;
    }
    if (f == "birth_death")
        return birth_death_closed_form(spec.alpha, spec.N,
                                       Direction::pole_to_origin);
    if (f == "heisenberg" || f == "complete")
        return 1.0 / k.stationary(spec.pole);
    return std::nullopt;
}

double fit_x_value(const std::string& key, const SweepRow& row) {
    if (key == "diameter") return row.diameter;
    if (key == "vertices") return row.spec.vertex_count;
    if (key == "N") return static_cast<double>(row.spec.N);
    if (key == "k") return row.spec.k;
    if (key == "side")
        return row.spec.sides.empty()
                   ? 0.0
                   : static_cast<double>(row.spec.sides.back());
    throw std::invalid_argument("run_sweep: unknown fit_x key '" + key + "'");
}

SweepRow compute_row(const SweepConfig& cfg, std::size_t i) {
    SweepRow row;
    row.grid_index = i;
    try {
        Generated g = make_family(cfg.family, cfg.grid[i]);
        row.spec = g.spec;
        row.notes = g.spec.notes;
        const MarkovKernel& k = g.kernel;

        if (g.spec.known_diameter >= 0) {
            row.diameter = g.spec.known_diameter;
            row.diameter_exact = true;
        } else {
            DiameterResult d = diameter(k, cfg.diameter_exact_threshold);
            row.diameter = d.value;
            row.diameter_exact = d.exact;
            if (!d.exact)
                row.notes.push_back("diameter is a double-sweep lower bound");
        }

        MetricProfile prof_o = metric_profile(k, g.spec.origin);
        MetricProfile prof_p = metric_profile(k, g.spec.pole);
        if (cfg.quantities.volume) {
            row.vsum_y = volume_sum(prof_p, g.spec.theta, row.diameter);
            row.vsum_x = volume_sum(prof_o, g.spec.theta, row.diameter);
        }

        if (cfg.quantities.exact) {
            if (k.size() <= kSweepSolveCap) {
                SolveStats s1, s2;
                Eigen::VectorXd to_pole = hitting_linear_solve(k, g.spec.pole, &s1);
                Eigen::VectorXd to_origin =
                    hitting_linear_solve(k, g.spec.origin, &s2);
                row.h_xy = to_pole[g.spec.origin];
                row.h_yx = to_origin[g.spec.pole];
                row.method = s1.method == s2.method
                                 ? s1.method
                                 : s1.method + "/" + s2.method;
                row.residual = std::max(s1.residual, s2.residual);
            } else {
                SampleStats fwd = sample_hitting(
                    k, g.spec.origin, g.spec.pole, cfg.mc_trials,
                    trial_key(cfg.seed, kSweepStream, 2 * i));
                SampleStats bwd = sample_hitting(
                    k, g.spec.pole, g.spec.origin, cfg.mc_trials,
                    trial_key(cfg.seed, kSweepStream, 2 * i + 1));
                row.h_xy = fwd.mean;
                row.h_yx = bwd.mean;
                row.mc = fwd;
                row.method = "mc";
                row.residual =
                    std::max(fwd.ci_half / std::max(1.0, fwd.mean),
                             bwd.ci_half / std::max(1.0, bwd.mean));
                if (!fwd.reliable || !bwd.reliable)
                    row.notes.push_back("mc step cap reached in > 0.1% of trials");
            }
            if (cfg.quantities.volume && row.vsum_y > 0.0)
                row.ratio = row.h_xy / row.vsum_y;
        }

        if (cfg.quantities.monte_carlo && !row.mc)
            row.mc = sample_hitting(k, g.spec.origin, g.spec.pole, cfg.mc_trials,
                                    trial_key(cfg.seed, kSweepStream, 2 * i));

        if (cfg.quantities.closed_form)
            row.closed_form = closed_form_for(g.spec, k, row.diameter, row.notes);

        if (cfg.quantities.trel) {
            if (k.size() <= kSpectralCap)
                row.trel = relaxation_time(spectral_decomposition(k));
            else
                row.trel = 1.0 / (1.0 - second_eigenvalue(k));
        }

        if (cfg.quantities.resistance)
            row.resistance = effective_resistance(k, g.spec.origin, g.spec.pole);
    } catch (const std::exception& e) {
        row.error = e.what();
        row.method = "error";
    }
    return row;
}

}  // namespace

ExponentFit fit_exponent(std::span<const double> sizes,
                         std::span<const double> values) {
    if (sizes.size() != values.size())
        throw std::invalid_argument("fit_exponent: size/value length mismatch");
    ExponentFit fit;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] <= 0.0 || values[i] <= 0.0) {
            fit.notes.push_back("excluded nonpositive point (size=" +
                                fmt(sizes[i]) + ", value=" + fmt(values[i]) +
                                ")");
            continue;
        }
        xs.push_back(std::log(sizes[i]));
        ys.push_back(std::log(values[i]));
    }
    auto n = static_cast<int>(xs.size());
    if (n < 3)
        throw std::invalid_argument(
            "fit_exponent: need at least 3 positive points, have " +
            std::to_string(n));
    fit.used = n;

    double xbar = 0, ybar = 0;
    for (int i = 0; i < n; ++i) {
        xbar += xs[i];
        ybar += ys[i];
    }
    xbar /= n;
    ybar /= n;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sxx += (xs[i] - xbar) * (xs[i] - xbar);
        sxy += (xs[i] - xbar) * (ys[i] - ybar);
    }
    if (sxx <= 0.0)
        throw std::invalid_argument("fit_exponent: degenerate size values");
    fit.slope = sxy / sxx;
    fit.intercept = ybar - fit.slope * xbar;
    double rss = 0;
    for (int i = 0; i < n; ++i) {
        double r = ys[i] - fit.intercept - fit.slope * xs[i];
        rss += r * r;
    }
    fit.stderr_slope = n > 2 ? std::sqrt(rss / (n - 2) / sxx) : 0.0;

    if (n >= 4) {
        Eigen::MatrixXd X(n, 3);
        Eigen::VectorXd Y(n);
        for (int i = 0; i < n; ++i) {
            X(i, 0) = 1.0;
            X(i, 1) = xs[i];
            X(i, 2) = xs[i] * xs[i];
            Y(i) = ys[i];
        }
        Eigen::MatrixXd xtx = X.transpose() * X;
        Eigen::VectorXd coef = xtx.ldlt().solve(X.transpose() * Y);
        double rss2 = (Y - X * coef).squaredNorm();
        double s2 = rss2 / (n - 3);
        Eigen::MatrixXd cov = xtx.inverse() * s2;
        fit.curvature = coef(2);
        fit.curvature_stderr = std::sqrt(std::max(cov(2, 2), 0.0));
        if (std::abs(fit.curvature) > 2.0 * fit.curvature_stderr &&
            fit.curvature_stderr >= 0.0) {
            fit.curvature_flag = true;
            fit.notes.push_back("log-curvature detected: quadratic term " +
                                fmt(fit.curvature) + " +- " +
                                fmt(fit.curvature_stderr));
        }
    }
    return fit;
}

SweepResult run_sweep(const SweepConfig& cfg) {
    SweepResult res;
    res.config = cfg;
    res.rows.resize(cfg.grid.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(cfg.grid.size());
         ++i)
        res.rows[i] = compute_row(cfg, static_cast<std::size_t>(i));

    std::vector<double> xs, ys_fwd, ys_bwd;
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    for (const auto& row : res.rows) {
        if (!row.error.empty()) continue;
        if (cfg.quantities.exact) {
            double x = fit_x_value(cfg.fit_x, row);
            xs.push_back(x);
            ys_fwd.push_back(row.h_xy);
            ys_bwd.push_back(row.h_yx);
            if (cfg.quantities.volume && row.vsum_y > 0 && row.vsum_x > 0) {
                rmin = std::min({rmin, row.h_xy / row.vsum_y,
                                 row.h_yx / row.vsum_x});
                rmax = std::max({rmax, row.h_xy / row.vsum_y,
                                 row.h_yx / row.vsum_x});
            }
        }
    }
    if (xs.size() >= 3) {
        try {
            res.fit_xy = fit_exponent(xs, ys_fwd);
        } catch (const std::exception&) {
        }
        try {
            res.fit_yx = fit_exponent(xs, ys_bwd);
        } catch (const std::exception&) {
        }
    }
    if (std::isfinite(rmin)) {
        res.ratio_min = rmin;
        res.ratio_max = rmax;
    }

    if (!cfg.out_path.empty()) {
        std::filesystem::path base(cfg.out_path);
        if (base.has_parent_path())
            std::filesystem::create_directories(base.parent_path());
        std::string stamp = iso_now();
        std::ofstream csv(cfg.out_path + ".csv");
        csv << res.render_csv(stamp);
        std::ofstream js(cfg.out_path + ".json");
        js << res.to_json().dump(2) << "\n";
    }
    return res;
}

std::string SweepResult::render_csv(const std::string& timestamp) const {
    std::string out = "# generated " + timestamp + "\n";
    out +=
        "family,params,vertices,D,H_xy,H_yx,vsum_y,vsum_x,closed_form,ratio,"
        "trel,method,residual\n";
    for (const auto& row : rows) {
        out += row.spec.family + ",\"" + row.spec.params_string() + "\"," +
               std::to_string(row.spec.vertex_count) + "," +
               std::to_string(row.diameter) + "," + fmt(row.h_xy) + "," +
               fmt(row.h_yx) + "," + fmt(row.vsum_y) + "," + fmt(row.vsum_x) +
               "," + fmt_opt(row.closed_form) + "," + fmt_opt(row.ratio) + "," +
               fmt_opt(row.trel) + "," + row.method + "," + fmt(row.residual) +
               "\n";
    }
    return out;
}

nlohmann::json SweepRow::to_json() const {
    nlohmann::json j{{"grid_index", grid_index},
                     {"family", spec.family},
                     {"params", spec.params_string()},
                     {"label", spec.label()},
                     {"vertices", spec.vertex_count},
                     {"edges", spec.edge_count},
                     {"theta", spec.theta},
                     {"diameter", diameter},
                     {"diameter_exact", diameter_exact},
                     {"h_xy", h_xy},
                     {"h_yx", h_yx},
                     {"vsum_y", vsum_y},
                     {"vsum_x", vsum_x},
                     {"method", method},
                     {"residual", residual},
                     {"notes", notes}};
    if (closed_form) j["closed_form"] = *closed_form;
    if (ratio) j["ratio"] = *ratio;
    if (trel) j["trel"] = *trel;
    if (resistance) j["resistance"] = *resistance;
    if (mc) {
        j["mc"] = {{"trials", mc->trials},     {"mean", mc->mean},
                   {"variance", mc->variance}, {"ci_half", mc->ci_half},
                   {"cap_hits", mc->cap_hits}, {"reliable", mc->reliable},
                   {"seed", mc->seed},         {"rng", mc->rng}};
    }
    if (!error.empty()) j["error"] = error;
    return j;
}

nlohmann::json ExponentFit::to_json() const {
    return nlohmann::json{{"slope", slope},
                          {"stderr", stderr_slope},
                          {"intercept", intercept},
                          {"used", used},
                          {"curvature_flag", curvature_flag},
                          {"curvature", curvature},
                          {"curvature_stderr", curvature_stderr},
                          {"notes", notes}};
}

nlohmann::json SweepConfig::to_json() const {
    nlohmann::json grid_json = nlohmann::json::array();
    for (const auto& entry : grid) {
        nlohmann::json e = nlohmann::json::object();
        for (const auto& [k, v] : entry) e[k] = v;
        grid_json.push_back(e);
    }
    std::vector<std::string> qs;
    if (quantities.exact) qs.push_back("exact");
    if (quantities.volume) qs.push_back("volume");
    if (quantities.closed_form) qs.push_back("closed_form");
    if (quantities.monte_carlo) qs.push_back("mc");
    if (quantities.trel) qs.push_back("trel");
    if (quantities.resistance) qs.push_back("resistance");
    return nlohmann::json{{"family", family},
                          {"grid", grid_json},
                          {"quantities", qs},
                          {"seed", seed},
                          {"mc_trials", mc_trials},
                          {"out", out_path},
                          {"fit_x", fit_x},
                          {"diameter_exact_threshold", diameter_exact_threshold}};
}

SweepConfig SweepConfig::from_json(const nlohmann::json& j) {
    SweepConfig cfg;
    cfg.family = j.at("family").get<std::string>();
    for (const auto& entry : j.at("grid")) {
        ParamList params;
        for (auto it = entry.begin(); it != entry.end(); ++it) {
            if (it.value().is_string())
                params.emplace_back(it.key(), it.value().get<std::string>());
            else
                params.emplace_back(it.key(), it.value().dump());
        }
        std::sort(params.begin(), params.end());
        cfg.grid.push_back(std::move(params));
    }
    if (j.contains("quantities")) {
        cfg.quantities = SweepQuantities{false, false, false, false, false, false};
        for (const auto& q : j.at("quantities")) {
            std::string name = q.get<std::string>();
            if (name == "exact") cfg.quantities.exact = true;
            else if (name == "volume") cfg.quantities.volume = true;
            else if (name == "closed_form") cfg.quantities.closed_form = true;
            else if (name == "mc") cfg.quantities.monte_carlo = true;
            else if (name == "trel") cfg.quantities.trel = true;
            else if (name == "resistance") cfg.quantities.resistance = true;
            else throw std::invalid_argument("unknown sweep quantity '" + name + "'");
        }
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("mc_trials"))
        cfg.mc_trials = j.at("mc_trials").get<std::uint64_t>();
    if (j.contains("out")) cfg.out_path = j.at("out").get<std::string>();
    if (j.contains("fit_x")) cfg.fit_x = j.at("fit_x").get<std::string>();
    if (j.contains("diameter_exact_threshold"))
        cfg.diameter_exact_threshold =
            j.at("diameter_exact_threshold").get<Index>();
    return cfg;
}

nlohmann::json SweepResult::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& row : rows) rows_json.push_back(row.to_json());
    nlohmann::json j{{"config", config.to_json()},
                     {"rows", rows_json},
                     {"ratio_min", ratio_min},
                     {"ratio_max", ratio_max}};
    if (fit_xy) j["fit_xy"] = fit_xy->to_json();
    if (fit_yx) j["fit_yx"] = fit_yx->to_json();
    return j;
}

LamplighterResult lamplighter_experiment(const std::vector<Generated>& bases) {
    LamplighterResult res;
    for (const auto& base : bases) {
        if (base.kernel.size() > 14)
            throw std::invalid_argument(
                "lamplighter_experiment: base '" + base.spec.label() +
                "' exceeds 14 vertices");
        LamplighterRow row;
        row.base_label = base.spec.label();
        row.base_vertices = base.kernel.size();

        // Vertex-transitivity heuristic: every source sees the same sorted
        // distance-shell profile.
        {
            std::vector<std::vector<Index>> profiles;
            for (Index v = 0; v < base.kernel.size(); ++v) {
                MetricProfile p = metric_profile(base.kernel, v);
                std::vector<Index> shells(p.ecc + 1, 0);
                for (Index u = 0; u < base.kernel.size(); ++u)
                    ++shells[p.dist[u]];
                profiles.push_back(std::move(shells));
            }
            for (const auto& p : profiles)
                if (p != profiles.front()) {
                    row.vertex_transitive = false;
                    row.notes.push_back(
                        "base may not be vertex-transitive (shell profiles "
                        "differ)");
                    break;
                }
        }

        SpectralData sd = spectral_decomposition(base.kernel);
        PeriodicityInfo per = periodicity(base.kernel);
        GreenFunction gf = green_function(base.kernel, sd, per);
        Eigen::MatrixXd H = hitting_matrix(gf, per);
        row.max_hitting = H.maxCoeff();

        Index diam = base.spec.known_diameter >= 0
                         ? base.spec.known_diameter
                         : diameter(base.kernel).value;
        for (Index v = 0; v < base.kernel.size(); ++v)
            row.vsum_bound =
                std::max(row.vsum_bound,
                         volume_sum(metric_profile(base.kernel, v),
                                    base.spec.theta, diam));

        Generated dia = lamplighter(base);
        row.diamond_vertices = dia.kernel.size();
        MarkovKernel lazy = dia.kernel.lazify(0.5);
        row.notes.push_back("t_rel computed on the 1/2-lazified lamp chain");
        if (lazy.size() <= kSpectralCap)
            row.trel = relaxation_time(spectral_decomposition(lazy));
        else
            row.trel = 1.0 / (1.0 - second_eigenvalue(lazy));
        row.ratio = row.trel / row.max_hitting;
        res.rows.push_back(std::move(row));
    }
    return res;
}

std::string LamplighterResult::render_csv(const std::string& timestamp) const {
    std::string out = "# generated " + timestamp + "\n";
    out +=
        "base,base_vertices,diamond_vertices,max_H,trel,ratio,vsum_bound,"
        "vertex_transitive\n";
    for (const auto& row : rows) {
        out += row.base_label + "," + std::to_string(row.base_vertices) + "," +
               std::to_string(row.diamond_vertices) + "," +
               fmt(row.max_hitting) + "," + fmt(row.trel) + "," +
               fmt(row.ratio) + "," + fmt(row.vsum_bound) + "," +
               (row.vertex_transitive ? "true" : "false") + "\n";
    }
    return out;
}

nlohmann::json LamplighterRow::to_json() const {
    return nlohmann::json{{"base", base_label},
                          {"base_vertices", base_vertices},
                          {"diamond_vertices", diamond_vertices},
                          {"max_hitting", max_hitting},
                          {"trel", trel},
                          {"ratio", ratio},
                          {"vsum_bound", vsum_bound},
                          {"vertex_transitive", vertex_transitive},
                          {"notes", notes}};
}

nlohmann::json LamplighterResult::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& row : rows) rows_json.push_back(row.to_json());
    return nlohmann::json{{"rows", rows_json}};
}

}  // namespace hittimes
