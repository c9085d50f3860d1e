// hittimes_cli.cpp — command-line front end: generate family kernels, solve
// hitting times, run the volume-sum estimator, Monte Carlo sampling, Harnack
// certification, and parameter sweeps.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "hittimes/estimate.hpp"
#include "hittimes/exact.hpp"
#include "hittimes/families.hpp"
#include "hittimes/harnack.hpp"
#include "hittimes/kernel.hpp"
#include "hittimes/metric.hpp"
#include "hittimes/simulate.hpp"
#include "hittimes/spectral.hpp"
#include "hittimes/sweep.hpp"

namespace {

using namespace hittimes;
using nlohmann::json;

struct GlobalOpts {
    std::uint64_t seed = 1;
    int threads = 0;
    std::string out_dir;
    std::string format = "json";
};

std::string resolve_out(const GlobalOpts& g, const std::string& path) {
    if (path.empty() || g.out_dir.empty()) return path;
    std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (std::filesystem::path(g.out_dir) / p).string();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

ParamList parse_params(const std::string& text) {
    ParamList out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("bad --params entry '" + item +
                                     "' (expected key=value)");
        out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
    return out;
}

// Loads a kernel plus (when present) its `<path>.json` FamilySpec sidecar.
struct LoadedKernel {
    MarkovKernel kernel;
    std::optional<FamilySpec> spec;
};

LoadedKernel load_kernel(const std::string& path) {
    LoadedKernel lk{MarkovKernel::from_edge_list(read_file(path)), std::nullopt};
    std::string sidecar = path + ".json";
    if (std::filesystem::exists(sidecar)) {
        try {
            lk.spec = FamilySpec::from_json(read_file(sidecar));
        } catch (const std::exception& e) {
            std::cerr << "warning: ignoring sidecar " << sidecar << ": "
                      << e.what() << "\n";
        }
    }
    return lk;
}

void emit(const GlobalOpts& g, const json& j, const std::string& out_name) {
    std::cout << j.dump(2) << "\n";
    if (!g.out_dir.empty())
        write_file(resolve_out(g, out_name), j.dump(2) + "\n");
}

json estimate_report_json(const EstimateReport& r) {
    json j{{"target", r.target},
           {"theta", r.theta},
           {"diameter", r.diameter},
           {"diameter_exact", r.diameter_exact},
           {"volume_sum", r.volume_sum},
           {"notes", r.notes}};
    if (r.closed_form) j["closed_form"] = *r.closed_form;
    if (r.exact_hitting) j["exact_hitting"] = *r.exact_hitting;
    if (r.ratio) j["ratio"] = *r.ratio;
    return j;
}

json sample_stats_json(const SampleStats& s) {
    return json{{"trials", s.trials},     {"mean", s.mean},
                {"variance", s.variance}, {"ci_half", s.ci_half},
                {"cap_hits", s.cap_hits}, {"reliable", s.reliable},
                {"seed", s.seed},         {"cap", s.cap},
                {"rng", s.rng}};
}

int cmd_generate(const GlobalOpts& g, const std::string& family,
                 const std::string& params, const std::string& out) {
    Generated gen = make_family(family, parse_params(params));
    std::string out_path = resolve_out(g, out);
    write_file(out_path, gen.kernel.to_edge_list());
    write_file(out_path + ".json", gen.spec.to_json() + "\n");
    json j{{"out", out_path},
           {"label", gen.spec.label()},
           {"vertices", gen.spec.vertex_count},
           {"edges", gen.spec.edge_count},
           {"theta", gen.spec.theta},
           {"origin", gen.spec.origin},
           {"pole", gen.spec.pole}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_solve(const GlobalOpts& g, const std::string& kernel_path, Index source,
              Index target, bool all_pairs) {
    LoadedKernel lk = load_kernel(kernel_path);
    const MarkovKernel& k = lk.kernel;
    if (source < 0 && lk.spec) source = lk.spec->origin;
    if (target < 0 && lk.spec) target = lk.spec->pole;
    if (source < 0 || target < 0)
        throw std::runtime_error("solve: need --source and --target (no sidecar)");

    SolveStats s1, s2;
    Eigen::VectorXd to_target = hitting_linear_solve(k, target, &s1);
    Eigen::VectorXd to_source = hitting_linear_solve(k, source, &s2);
    json j{{"vertices", k.size()},
           {"source", source},
           {"target", target},
           {"h_source_to_target", to_target[source]},
           {"h_target_to_source", to_source[target]},
           {"method", s1.method},
           {"residual", std::max(s1.residual, s2.residual)},
           {"iterations", std::max(s1.iterations, s2.iterations)}};

    if (all_pairs) {
        SpectralData sd = spectral_decomposition(k);
        PeriodicityInfo per = periodicity(k);
        GreenFunction gf = green_function(k, sd, per);
        Eigen::MatrixXd H = hitting_matrix(gf, per);
        Index amax_x = 0, amax_y = 0;
        double hmax = 0.0, sum = 0.0;
        for (Index x = 0; x < k.size(); ++x)
            for (Index y = 0; y < k.size(); ++y) {
                sum += H(x, y);
                if (H(x, y) > hmax) {
                    hmax = H(x, y);
                    amax_x = x;
                    amax_y = y;
                }
            }
        json ap{{"max", hmax},
                {"argmax", {amax_x, amax_y}},
                {"mean", sum / (static_cast<double>(k.size()) * k.size())},
                {"method", "spectral-green"}};
        if (k.size() <= 64) {
            json rows = json::array();
            for (Index x = 0; x < k.size(); ++x) {
                json row = json::array();
                for (Index y = 0; y < k.size(); ++y) row.push_back(H(x, y));
                rows.push_back(row);
            }
            ap["matrix"] = rows;
        }
        j["all_pairs"] = ap;
    }
    emit(g, j, "solve.json");
    return 0;
}

int cmd_estimate(const GlobalOpts& g, const std::string& kernel_path,
                 Index source, Index target, double theta,
                 const std::string& closed_form_family) {
    LoadedKernel lk = load_kernel(kernel_path);
    const MarkovKernel& k = lk.kernel;
    if (target < 0 && lk.spec) target = lk.spec->pole;
    if (source < 0) source = lk.spec ? lk.spec->origin : 0;
    if (target < 0) throw std::runtime_error("estimate: need --target");
    if (theta <= 0.0 && lk.spec) theta = lk.spec->theta;
    if (theta <= 0.0) throw std::runtime_error("estimate: need --theta");

    EstimateReport rep;
    rep.target = target;
    rep.theta = theta;
    if (lk.spec && lk.spec->known_diameter >= 0) {
        rep.diameter = lk.spec->known_diameter;
        rep.diameter_exact = true;
    } else {
        DiameterResult d = diameter(k);
        rep.diameter = d.value;
        rep.diameter_exact = d.exact;
    }
    MetricProfile prof = metric_profile(k, target);
    rep.volume_sum = volume_sum(prof, theta, rep.diameter);

    if (!closed_form_family.empty()) {
        FamilySpec spec = lk.spec.value_or(FamilySpec{});
        spec.family = closed_form_family;
        if (spec.family == "torus" || spec.family == "cycle") {
            rep.closed_form = rect_torus_closed_form(spec.sides);
        } else if (spec.family == "sierpinski") {
            rep.closed_form = ahlfors_closed_form(std::log(3.0) / std::log(2.0),
                                                  theta, rep.diameter);
        } else if (spec.family == "vicsek") {
            rep.closed_form = ahlfors_closed_form(std::log(5.0) / std::log(3.0),
                                                  theta, rep.diameter);
        } else if (spec.family == "trace2d" || spec.family == "trace3d") {
            std::string note;
            rep.closed_form =
                trace_closed_form(spec, Direction::pole_to_origin, &note);
            if (!note.empty()) rep.notes.push_back(note);
        } else if (spec.family == "birth_death") {
            rep.closed_form = birth_death_closed_form(spec.alpha, spec.N,
                                                      Direction::pole_to_origin);
        } else if (spec.family == "heisenberg" || spec.family == "complete") {
            rep.closed_form = 1.0 / k.stationary(target);
        } else {
            throw std::runtime_error("estimate: no closed form for family '" +
                                     spec.family + "'");
        }
    }

    if (k.size() <= kSweepSolveCap) {
        Eigen::VectorXd h = hitting_linear_solve(k, target);
        rep.exact_hitting = h[source];
        if (rep.volume_sum > 0.0) rep.ratio = *rep.exact_hitting / rep.volume_sum;
    }

    ThetaFastVerdict fast = theta_fast_check(prof, theta, kThetaFastGrid);
    json j = estimate_report_json(rep);
    j["source"] = source;
    j["theta_fast"] = json{{"fast", fast.fast},
                           {"epsilon", fast.epsilon},
                           {"c0", fast.c0},
                           {"estimate", fast.estimate}};
    emit(g, j, "estimate.json");
    return 0;
}

int cmd_simulate(const GlobalOpts& g, const std::string& kernel_path,
                 Index source, Index target, std::uint64_t trials,
                 std::uint64_t cap) {
    LoadedKernel lk = load_kernel(kernel_path);
    if (source < 0 && lk.spec) source = lk.spec->origin;
    if (target < 0 && lk.spec) target = lk.spec->pole;
    if (source < 0 || target < 0)
        throw std::runtime_error("simulate: need --source and --target");
    SampleStats s =
        sample_hitting(lk.kernel, source, target, trials, g.seed, cap);
    emit(g, sample_stats_json(s), "simulate.json");
    return 0;
}

int cmd_check(const GlobalOpts& g, const std::string& kernel_path, double theta,
              int balls, int envelope_sample, double lazify_eps) {
    LoadedKernel lk = load_kernel(kernel_path);
    if (theta <= 0.0 && lk.spec) theta = lk.spec->theta;
    if (theta <= 0.0) throw std::runtime_error("check: need --theta");
    MarkovKernel k = lk.kernel;
    if (lazify_eps > 0.0) k = k.lazify(lazify_eps);
    HarnackOptions opt;
    opt.balls = balls;
    opt.envelope_sample = envelope_sample;
    opt.seed = g.seed;
    double known = -1.0;
    if (lk.spec && lk.spec->known_diameter >= 0)
        known = lk.spec->known_diameter;
    HarnackCertificate cert = harnack_certificate(k, theta, opt, known);
    emit(g, cert.to_json(), "check.json");
    return 0;
}

int cmd_sweep(const GlobalOpts& g, const std::string& config_path,
              const std::string& out_override, std::uint64_t seed_override,
              bool seed_given) {
    SweepConfig cfg = SweepConfig::from_json(json::parse(read_file(config_path)));
    if (!out_override.empty()) cfg.out_path = out_override;
    if (seed_given) cfg.seed = seed_override;
    cfg.out_path = resolve_out(g, cfg.out_path);
    SweepResult res = run_sweep(cfg);

    int failures = 0;
    for (const auto& row : res.rows)
        if (!row.error.empty()) {
            ++failures;
            std::cerr << "row " << row.grid_index << " failed: " << row.error
                      << "\n";
        }
    if (g.format == "csv")
        std::cout << res.render_csv("(stdout)");
    else
        std::cout << res.to_json().dump(2) << "\n";
    return failures == 0 ? 0 : 1;
}

int cmd_lamplighter(const GlobalOpts& g, const std::string& bases_arg,
                    const std::string& out) {
    std::vector<Generated> bases;
    std::stringstream ss(bases_arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto colon = item.find(':');
        if (colon == std::string::npos)
            throw std::runtime_error("bad --bases entry '" + item +
                                     "' (expected family:size)");
        std::string tag = item.substr(0, colon);
        std::string size = item.substr(colon + 1);
        bases.push_back(make_family(tag, {{"n", size}}));
    }
    if (bases.empty()) throw std::runtime_error("lamplighter: no bases given");
    LamplighterResult res = lamplighter_experiment(bases);
    if (g.format == "csv")
        std::cout << res.render_csv("(stdout)");
    else
        std::cout << res.to_json().dump(2) << "\n";
    if (!out.empty()) {
        std::string path = resolve_out(g, out);
        write_file(path + ".csv", res.render_csv("(file)"));
        write_file(path + ".json", res.to_json().dump(2) + "\n");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact hitting times, volume-sum estimates, and Harnack "
                 "certification on reversible chains"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "global RNG seed");
    app.add_option("--threads", g.threads, "OpenMP thread count (0 = default)");
    app.add_option("--out-dir", g.out_dir, "directory for output artifacts");
    app.add_option("--format", g.format, "stdout format for tabular commands")
        ->check(CLI::IsMember({"csv", "json"}));

    auto* gen = app.add_subcommand("generate", "emit a family kernel edge list");
    std::string gen_family, gen_params, gen_out = "kernel.edges";
    gen->add_option("--family", gen_family, "family tag")->required();
    gen->add_option("--params", gen_params, "key=val,... family parameters");
    gen->add_option("--out", gen_out, "output edge-list path");

    auto* solve = app.add_subcommand("solve", "exact hitting times");
    std::string solve_kernel;
    Index solve_source = -1, solve_target = -1;
    bool solve_all = false;
    solve->add_option("--kernel", solve_kernel, "edge-list path")->required();
    solve->add_option("--source", solve_source, "source vertex");
    solve->add_option("--target", solve_target, "target vertex");
    solve->add_flag("--all-pairs", solve_all, "dense all-pairs summary");

    auto* est = app.add_subcommand("estimate", "volume-sum estimate");
    std::string est_kernel, est_closed;
    Index est_source = -1, est_target = -1;
    double est_theta = 0.0;
    est->add_option("--kernel", est_kernel, "edge-list path")->required();
    est->add_option("--source", est_source, "source vertex");
    est->add_option("--target", est_target, "target vertex");
    est->add_option("--theta", est_theta, "walk-dimension exponent");
    est->add_option("--closed-form", est_closed, "family tag for closed form");

    auto* sim = app.add_subcommand("simulate", "Monte Carlo hitting times");
    std::string sim_kernel;
    Index sim_source = -1, sim_target = -1;
    std::uint64_t sim_trials = 2000, sim_cap = kDefaultStepCap;
    sim->add_option("--kernel", sim_kernel, "edge-list path")->required();
    sim->add_option("--source", sim_source, "source vertex");
    sim->add_option("--target", sim_target, "target vertex");
    sim->add_option("--trials", sim_trials, "trial count");
    sim->add_option("--cap", sim_cap, "per-trial step cap");

    auto* chk = app.add_subcommand("check", "Harnack certificate");
    std::string chk_kernel;
    double chk_theta = 0.0, chk_lazify = 0.0;
    int chk_balls = 20, chk_env = 200;
    chk->add_option("--kernel", chk_kernel, "edge-list path")->required();
    chk->add_option("--theta", chk_theta, "walk-dimension exponent");
    chk->add_option("--balls", chk_balls, "Poincaré ball sample size");
    chk->add_option("--envelope-sample", chk_env, "heat-kernel sample size");
    chk->add_option("--lazify", chk_lazify, "lazify by eps before checking");

    auto* swp = app.add_subcommand("sweep", "family parameter sweep");
    std::string swp_config, swp_out;
    swp->add_option("--config", swp_config, "sweep config JSON")->required();
    swp->add_option("--out", swp_out, "override output base path");

    auto* lamp = app.add_subcommand("lamplighter",
                                    "relaxation time vs max hitting time");
    std::string lamp_bases = "cycle:4,cycle:6,cycle:8,complete:4";
    std::string lamp_out;
    lamp->add_option("--bases", lamp_bases, "comma list of family:size");
    lamp->add_option("--out", lamp_out, "output base path");

    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    if (g.threads > 0) omp_set_num_threads(g.threads);
#endif

    try {
        if (gen->parsed()) return cmd_generate(g, gen_family, gen_params, gen_out);
        if (solve->parsed())
            return cmd_solve(g, solve_kernel, solve_source, solve_target,
                             solve_all);
        if (est->parsed())
            return cmd_estimate(g, est_kernel, est_source, est_target, est_theta,
                                est_closed);
        if (sim->parsed())
            return cmd_simulate(g, sim_kernel, sim_source, sim_target,
                                sim_trials, sim_cap);
        if (chk->parsed())
            return cmd_check(g, chk_kernel, chk_theta, chk_balls, chk_env,
                             chk_lazify);
        if (swp->parsed())
            return cmd_sweep(g, swp_config, swp_out, g.seed,
                             app.count("--seed") > 0);
        if (lamp->parsed()) return cmd_lamplighter(g, lamp_bases, lamp_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
