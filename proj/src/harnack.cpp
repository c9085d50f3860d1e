#include "hittimes/harnack.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hittimes/metric.hpp"
#include "hittimes/simulate.hpp"

namespace hittimes {

namespace {

constexpr std::uint64_t kDoublingStream = 0x44424C47ull;  // "DBLG"
constexpr std::uint64_t kPoincareStream = 0x504F494Eull;  // "POIN"
constexpr std::uint64_t kEnvelopeStream = 0x454E5633ull;  // "ENV3"

double sub_gaussian_exponent(double d, double n, double theta) {
    if (d <= 0.0) return 0.0;
    return std::pow(std::pow(d, theta) / n, 1.0 / (theta - 1.0));
}

// v_{n+1}(y) = sum_x v_n(x) K(x,y), evaluated by symmetry of c as a gather
// over row y: sum_x c(y,x) * v(x)/s(x).
void apply_kernel(const MarkovKernel& k, const std::vector<double>& v,
                  std::vector<double>& out, std::vector<double>& scratch) {
    const Index n = k.size();
    scratch.resize(n);
    out.resize(n);
#pragma omp parallel for schedule(static)
    for (Index x = 0; x < n; ++x) scratch[x] = v[x] / k.strength(x);
#pragma omp parallel for schedule(static)
    for (Index y = 0; y < n; ++y) {
        auto cols = k.neighbors(y);
        auto vals = k.conductances(y);
        double acc = 0.0;
        for (std::size_t i = 0; i < cols.size(); ++i)
            acc += vals[i] * scratch[cols[i]];
        out[y] = acc;
    }
}

std::vector<std::uint64_t> geometric_grid(std::uint64_t hi, int count) {
    std::vector<std::uint64_t> out;
    if (hi < 1) return out;
    if (hi <= static_cast<std::uint64_t>(count)) {
        for (std::uint64_t v = 1; v <= hi; ++v) out.push_back(v);
        return out;
    }
    double lo_log = 0.0, hi_log = std::log(static_cast<double>(hi));
    for (int i = 0; i < count; ++i) {
        double t = count == 1 ? 1.0
                              : static_cast<double>(i) / (count - 1);
        auto v = static_cast<std::uint64_t>(
            std::llround(std::exp(lo_log + t * (hi_log - lo_log))));
        v = std::max<std::uint64_t>(1, std::min(v, hi));
        if (out.empty() || v > out.back()) out.push_back(v);
    }
    if (out.back() != hi) out.push_back(hi);
    return out;
}

}  // namespace

double ellipticity(const MarkovKernel& k) {
    double p0 = std::numeric_limits<double>::infinity();
    for (Index x = 0; x < k.size(); ++x) {
        auto cols = k.neighbors(x);
        auto vals = k.conductances(x);
        double s = k.strength(x);
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (cols[i] == x || vals[i] <= 0.0) continue;
            p0 = std::min(p0, vals[i] / s);
        }
    }
    if (!std::isfinite(p0))
        throw std::invalid_argument("ellipticity: kernel has no proper edges");
    return p0;
}

double doubling_constant(const MarkovKernel& k, Index exact_threshold,
                         Index source_cap, std::uint64_t seed) {
    const Index n = k.size();
    std::vector<Index> sources;
    if (n <= exact_threshold || n <= source_cap) {
        sources.resize(n);
        std::iota(sources.begin(), sources.end(), 0);
    } else {
        std::vector<Index> pool(n);
        std::iota(pool.begin(), pool.end(), 0);
        SplitMix64 g(trial_key(seed, kDoublingStream, 0));
        for (Index i = 0; i < source_cap; ++i) {
            Index j = i + static_cast<Index>(g.next() % (n - i));
            std::swap(pool[i], pool[j]);
        }
        sources.assign(pool.begin(), pool.begin() + source_cap);
    }

    double best = 1.0;
#pragma omp parallel
    {
        double local = 1.0;
#pragma omp for schedule(dynamic, 16) nowait
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(sources.size());
             ++i) {
            MetricProfile prof = metric_profile(k, sources[i]);
            for (Index r = 1; r <= prof.ecc; r *= 2) {
                double lo = prof.volume(r);
                double hi = prof.volume(std::min<Index>(2 * r, prof.ecc));
                if (lo > 0.0) local = std::max(local, hi / lo);
            }
        }
#pragma omp critical
        best = std::max(best, local);
    }
    return best;
}

PoincareReport poincare_profile(const MarkovKernel& k, double theta, int balls,
                                Index cap, std::uint64_t seed) {
    const Index n = k.size();
    PoincareReport rep;
    SplitMix64 g(trial_key(seed, kPoincareStream, 0));
    const int levels = 5;
    for (int i = 0; i < balls; ++i) {
        Index source = static_cast<Index>(g.next() % n);
        MetricProfile prof = metric_profile(k, source);
        if (prof.ecc < 1) {
            ++rep.skipped;
            continue;
        }
        double frac = static_cast<double>(i % levels + 1) / levels;
        Index r = std::max<Index>(
            1, static_cast<Index>(
                   std::llround(std::pow(static_cast<double>(prof.ecc), frac))));
        r = std::min(r, prof.ecc);

        std::vector<Index> members;
        for (Index v = 0; v < n; ++v)
            if (prof.dist[v] <= r) members.push_back(v);
        auto m = static_cast<Index>(members.size());
        if (m < 2 || m > cap) {
            ++rep.skipped;
            continue;
        }

        std::vector<Index> local(n, -1);
        for (Index j = 0; j < m; ++j) local[members[j]] = j;

        // Pencil 2 L_B f = lambda diag(s|_B) f; the total-weight factor
        // cancels between the Dirichlet form and the pi measure.
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
        std::vector<double> root(m);
        for (Index j = 0; j < m; ++j) root[j] = std::sqrt(k.strength(members[j]));
        for (Index j = 0; j < m; ++j) {
            Index u = members[j];
            auto cols = k.neighbors(u);
            auto vals = k.conductances(u);
            double diag = 0.0;
            for (std::size_t t = 0; t < cols.size(); ++t) {
                Index v = cols[t];
                if (v == u || vals[t] <= 0.0 || local[v] < 0) continue;
                diag += 2.0 * vals[t];
                T(j, local[v]) -= 2.0 * vals[t] / (root[j] * root[local[v]]);
            }
            T(j, j) = diag / (root[j] * root[j]);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        if (es.info() != Eigen::Success) {
            ++rep.skipped;
            continue;
        }
        double lambda1 = std::max(es.eigenvalues()(1), 1e-300);
        rep.per_ball.push_back(1.0 /
                               (std::pow(static_cast<double>(r), theta) * lambda1));
        ++rep.evaluated;
    }
    for (double c : rep.per_ball) rep.c_p = std::max(rep.c_p, c);
    return rep;
}

double spectral_gap_check(const SpectralData& sd, double diameter,
                          double theta) {
    if (sd.beta.size() < 2)
        throw std::invalid_argument("spectral_gap_check: need >= 2 eigenvalues");
    return (1.0 - sd.beta[1]) * std::pow(diameter, theta);
}

double spectral_gap_check(const MarkovKernel& k, double diameter,
                          double theta) {
    return (1.0 - second_eigenvalue(k)) * std::pow(diameter, theta);
}

EnvelopeFit heat_kernel_envelope(const MarkovKernel& k, double theta,
                                 double diameter, const HarnackOptions& opt,
                                 std::vector<EnvelopePoint>* rows_out) {
    if (theta <= 1.0)
        throw std::invalid_argument("heat_kernel_envelope: requires theta > 1");
    const Index n = k.size();

    // Deterministic source triple: a corner of the id range, its metric
    // antipode, and a mid-shell vertex.
    std::vector<Index> sources{0};
    Index far = farthest_vertex(k, 0);
    if (far != 0) sources.push_back(far);
    MetricProfile prof0 = metric_profile(k, 0);
    if (prof0.ecc >= 2) {
        Index half = prof0.ecc / 2;
        for (Index v = 0; v < n; ++v)
            if (prof0.dist[v] == half && v != 0 && v != far) {
                sources.push_back(v);
                break;
            }
    }

    double dtheta = std::pow(std::max(diameter, 1.0), theta);
    std::uint64_t n_max = opt.envelope_step_budget;
    if (10.0 * dtheta < static_cast<double>(n_max))
        n_max = static_cast<std::uint64_t>(std::llround(10.0 * dtheta));
    n_max = std::max<std::uint64_t>(n_max, 4);

    int grid_count = std::max(
        4, static_cast<int>(opt.envelope_sample /
                            std::max<std::size_t>(1, sources.size() * 5)));
    std::vector<std::uint64_t> grid = geometric_grid(n_max, grid_count);

    std::vector<EnvelopePoint> rows;
    EnvelopeFit fit;
    fit.rate_grid.assign(std::begin(kEnvelopeRateGrid),
                         std::end(kEnvelopeRateGrid));

    std::vector<double> v, next, scratch;
    for (Index src : sources) {
        MetricProfile prof = metric_profile(k, src);
        std::vector<std::vector<Index>> shells(prof.ecc + 1);
        for (Index u = 0; u < n; ++u) shells[prof.dist[u]].push_back(u);

        v.assign(n, 0.0);
        v[src] = 1.0;
        std::size_t gi = 0;
        std::vector<std::size_t> pending;
        for (std::uint64_t step = 1; step <= n_max + 1; ++step) {
            apply_kernel(k, v, next, scratch);
            v.swap(next);
            ++fit.steps_used;
            for (std::size_t r : pending)
                rows[r].kn1 = v[rows[r].y] / k.stationary(rows[r].y);
            pending.clear();
            if (gi < grid.size() && grid[gi] == step) {
                double radius = std::pow(static_cast<double>(step), 1.0 / theta);
                std::vector<Index> dists{0};
                auto push_dist = [&](double d) {
                    auto di = static_cast<Index>(std::llround(d));
                    di = std::max<Index>(1, std::min(di, prof.ecc));
                    if (std::find(dists.begin(), dists.end(), di) == dists.end())
                        dists.push_back(di);
                };
                push_dist(std::floor(radius / 2.0));
                push_dist(std::floor(radius));
                push_dist(std::ceil(2.0 * radius));
                push_dist(std::ceil(opt.target_reach * radius));
                auto vol_r = prof.volume(static_cast<Index>(
                    std::min<double>(std::floor(radius),
                                     static_cast<double>(prof.ecc))));
                for (Index d : dists) {
                    const auto& shell = shells[d];
                    if (shell.empty()) continue;
                    std::uint64_t tag = (static_cast<std::uint64_t>(src) << 40) ^
                                        (step << 8) ^ static_cast<std::uint64_t>(d);
                    SplitMix64 g(trial_key(opt.seed, kEnvelopeStream, tag));
                    Index y = shell[g.next() % shell.size()];
                    EnvelopePoint p;
                    p.x = src;
                    p.y = y;
                    p.n = step;
                    p.dist = prof.dist[y];
                    p.kn = v[y] / k.stationary(y);
                    p.volume = vol_r;
                    rows.push_back(p);
                    pending.push_back(rows.size() - 1);
                }
                ++gi;
            }
            if (gi >= grid.size() && pending.empty()) break;
        }
    }

    fit.sample_size = rows.size();
    fit.upper_c1.assign(fit.rate_grid.size(), 0.0);
    fit.lower_c1.assign(fit.rate_grid.size(),
                        std::numeric_limits<double>::infinity());
    for (const auto& p : rows) {
        bool eligible = static_cast<std::uint64_t>(p.dist) <= p.n;
        if (eligible) ++fit.lower_eligible;
        double e = sub_gaussian_exponent(p.dist, static_cast<double>(p.n), theta);
        for (std::size_t i = 0; i < fit.rate_grid.size(); ++i) {
            double boost = std::exp(fit.rate_grid[i] * e);
            fit.upper_c1[i] = std::max(fit.upper_c1[i], p.kn * p.volume * boost);
            if (eligible)
                fit.lower_c1[i] =
                    std::min(fit.lower_c1[i], (p.kn + p.kn1) * p.volume * boost);
        }
    }
    for (double& c : fit.lower_c1)
        if (!std::isfinite(c)) c = 0.0;

    for (const auto& p : rows) {
        double e = sub_gaussian_exponent(p.dist, static_cast<double>(p.n), theta);
        for (std::size_t i = 0; i < fit.rate_grid.size(); ++i) {
            double decay = std::exp(-fit.rate_grid[i] * e);
            double upper = fit.upper_c1[i] / p.volume * decay;
            if (p.kn > upper * (1.0 + 1e-9)) ++fit.upper_violations;
            if (static_cast<std::uint64_t>(p.dist) <= p.n) {
                double lower = fit.lower_c1[i] / p.volume * decay;
                if (p.kn + p.kn1 < lower * (1.0 - 1e-9)) ++fit.lower_violations;
            }
        }
    }
    if (rows_out) *rows_out = std::move(rows);
    return fit;
}

HarnackCertificate harnack_certificate(const MarkovKernel& k, double theta,
                                       const HarnackOptions& opt,
                                       double known_diameter) {
    HarnackCertificate cert;
    cert.theta = theta;
    cert.p0 = ellipticity(k);
    cert.doubling = doubling_constant(k, opt.doubling_exact_threshold,
                                      opt.doubling_source_cap, opt.seed);
    PoincareReport poin =
        poincare_profile(k, theta, opt.balls, opt.poincare_cap, opt.seed);
    cert.poincare = poin.c_p;
    cert.poincare_balls = poin.evaluated;
    cert.poincare_skipped = poin.skipped;

    if (known_diameter >= 0.0) {
        cert.diameter = known_diameter;
        cert.diameter_exact = true;
    } else {
        DiameterResult d = diameter(k);
        cert.diameter = static_cast<double>(d.value);
        cert.diameter_exact = d.exact;
    }
    cert.beta1 = second_eigenvalue(k);
    cert.gap_product = (1.0 - cert.beta1) * std::pow(cert.diameter, theta);
    cert.envelope = heat_kernel_envelope(k, theta, cert.diameter, opt);
    return cert;
}

MixingDecayFit mixing_decay_fit(const MarkovKernel& k, double theta,
                                double diameter) {
    MixingDecayFit fitres;
    double dtheta = std::pow(std::max(diameter, 1.0), theta);
    const double mults[] = {1.0, 1.5, 2.0, 3.0, 4.0};
    for (double m : mults) {
        auto v = static_cast<std::uint64_t>(std::llround(m * dtheta));
        v = std::max<std::uint64_t>(v, 1);
        if (fitres.ns.empty() || v > fitres.ns.back()) fitres.ns.push_back(v);
    }
    fitres.values.assign(fitres.ns.size(), 0.0);

    const Index n = k.size();
    std::vector<Index> sources{0};
    Index far = farthest_vertex(k, 0);
    if (far != 0) sources.push_back(far);
    std::vector<double> v, next, scratch;
    for (Index src : sources) {
        v.assign(n, 0.0);
        v[src] = 1.0;
        std::size_t gi = 0;
        for (std::uint64_t step = 1; step <= fitres.ns.back() && gi < fitres.ns.size();
             ++step) {
            apply_kernel(k, v, next, scratch);
            v.swap(next);
            if (step == fitres.ns[gi]) {
                double worst = 0.0;
                for (Index y = 0; y < n; ++y)
                    worst = std::max(worst,
                                     std::abs(v[y] / k.stationary(y) - 1.0));
                fitres.values[gi] = std::max(fitres.values[gi], worst);
                ++gi;
            }
        }
    }

    // Least squares on log m(n) = log C - rate * (n / D^theta).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    auto count = static_cast<double>(fitres.ns.size());
    for (std::size_t i = 0; i < fitres.ns.size(); ++i) {
        double x = static_cast<double>(fitres.ns[i]) / dtheta;
        double y = std::log(std::max(fitres.values[i], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double denom = count * sxx - sx * sx;
    double slope = denom != 0.0 ? (count * sxy - sx * sy) / denom : 0.0;
    fitres.rate = -slope;
    fitres.big_c = std::exp(sy / count + fitres.rate * sx / count);
    return fitres;
}

nlohmann::json EnvelopeFit::to_json() const {
    return nlohmann::json{{"rate_grid", rate_grid},
                          {"upper_c1", upper_c1},
                          {"lower_c1", lower_c1},
                          {"sample_size", sample_size},
                          {"lower_eligible", lower_eligible},
                          {"upper_violations", upper_violations},
                          {"lower_violations", lower_violations},
                          {"steps_used", steps_used}};
}

nlohmann::json HarnackCertificate::to_json() const {
    return nlohmann::json{{"p0", p0},
                          {"doubling", doubling},
                          {"poincare", poincare},
                          {"poincare_balls", poincare_balls},
                          {"poincare_skipped", poincare_skipped},
                          {"gap_product", gap_product},
                          {"beta1", beta1},
                          {"diameter", diameter},
                          {"diameter_exact", diameter_exact},
                          {"theta", theta},
                          {"envelope", envelope.to_json()}};
}

}  // namespace hittimes
