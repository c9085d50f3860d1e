#include "hittimes/families.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

#include "hittimes/metric.hpp"
#include "json.hpp"

namespace hittimes {

namespace {

using json = nlohmann::json;

long long ipow(long long b, int e) {
    long long r = 1;
    while (e-- > 0) r *= b;
    return r;
}

// Deterministic id assignment for coordinate-keyed vertex sets.
struct CoordIds {
    std::unordered_map<std::uint64_t, Index> ids;
    Index next = 0;
    Index get(std::int64_t x, std::int64_t y) {
        std::uint64_t key = (static_cast<std::uint64_t>(x + (1LL << 30)) << 32) |
                            static_cast<std::uint64_t>(y + (1LL << 30));
        auto [it, fresh] = ids.try_emplace(key, next);
        if (fresh) ++next;
        return it->second;
    }
};

void fill_counts(FamilySpec& spec, const MarkovKernel& k) {
    spec.vertex_count = k.size();
    spec.edge_count = static_cast<long long>(k.edge_count());
}

}  // namespace

std::string FamilySpec::params_string() const {
    std::ostringstream out;
    if (family == "torus") {
        out << "sides=";
        for (std::size_t i = 0; i < sides.size(); ++i)
            out << (i ? "x" : "") << sides[i];
    } else if (family == "sierpinski" || family == "vicsek") {
        out << "k=" << k;
    } else if (family == "trace2d") {
        out << "alpha=" << alpha << ",N=" << N;
    } else if (family == "trace3d") {
        out << "alpha=" << alpha << ",beta=" << beta << ",N=" << N;
    } else if (family == "birth_death") {
        out << "alpha=" << alpha << ",N=" << N;
    } else if (family == "heisenberg") {
        out << "N=" << N;
    } else if (family == "lamplighter") {
        out << "base=" << base;
    } else if (family == "cycle" || family == "complete") {
        out << "n=" << N;
    }
    return out.str();
}

std::string FamilySpec::label() const {
    std::string p = params_string();
    return family + "(" + p + ")";
}

std::string FamilySpec::to_json() const {
    json j;
    j["family"] = family;
    if (!sides.empty()) j["sides"] = sides;
    if (family == "trace2d" || family == "trace3d" || family == "birth_death")
        j["alpha"] = alpha;
    if (family == "trace3d") j["beta"] = beta;
    if (N) j["N"] = N;
    if (k) j["k"] = k;
    if (!base.empty()) j["base"] = base;
    j["theta"] = theta;
    j["canonical_pair"] = {origin, pole};
    j["vertices"] = vertex_count;
    j["edges"] = edge_count;
    if (known_diameter >= 0) j["diameter"] = known_diameter;
    if (!notes.empty()) j["notes"] = notes;
    return j.dump(2);
}

FamilySpec FamilySpec::from_json(const std::string& text) {
    json j = json::parse(text);
    FamilySpec s;
    s.family = j.at("family").get<std::string>();
    if (j.contains("sides")) s.sides = j["sides"].get<std::vector<long long>>();
    if (j.contains("alpha")) s.alpha = j["alpha"].get<double>();
    if (j.contains("beta")) s.beta = j["beta"].get<double>();
    if (j.contains("N")) s.N = j["N"].get<long long>();
    if (j.contains("k")) s.k = j["k"].get<int>();
    if (j.contains("base")) s.base = j["base"].get<std::string>();
    s.theta = j.at("theta").get<double>();
    s.origin = j.at("canonical_pair")[0].get<Index>();
    s.pole = j.at("canonical_pair")[1].get<Index>();
    if (j.contains("vertices")) s.vertex_count = j["vertices"].get<Index>();
    if (j.contains("edges")) s.edge_count = j["edges"].get<long long>();
    if (j.contains("diameter")) s.known_diameter = j["diameter"].get<Index>();
    if (j.contains("notes")) s.notes = j["notes"].get<std::vector<std::string>>();
    return s;
}

Generated rectangular_torus(const std::vector<long long>& sides) {
    if (sides.empty()) throw std::invalid_argument("torus needs at least one side");
    long long n = 1;
    for (long long a : sides) {
        if (a < 1) throw std::invalid_argument("torus sides must be >= 1");
        n *= a;
        if (n > 2'000'000) throw std::invalid_argument("torus too large");
    }
    if (n < 2) throw std::invalid_argument("torus must have at least 2 vertices");

    // Mixed-radix index: id = sum_i coord_i * stride_i.
    std::size_t dims = sides.size();
    std::vector<long long> stride(dims, 1);
    for (std::size_t i = 1; i < dims; ++i) stride[i] = stride[i - 1] * sides[i - 1];

    std::vector<WeightedEdge> edges;
    std::vector<long long> coord(dims, 0);
    for (long long id = 0; id < n; ++id) {
        for (std::size_t i = 0; i < dims; ++i) {
            long long a = sides[i];
            if (a == 1) continue;
            long long up = coord[i] + 1 == a ? id - coord[i] * stride[i]
                                             : id + stride[i];
            if (a == 2) {
                // +1 and -1 coincide: one doubled transition, emitted once.
                if (coord[i] == 0)
                    edges.push_back({static_cast<Index>(id), static_cast<Index>(up), 2.0});
            } else {
                edges.push_back({static_cast<Index>(id), static_cast<Index>(up), 1.0});
            }
        }
        // Increment mixed-radix counter.
        for (std::size_t i = 0; i < dims; ++i) {
            if (++coord[i] < sides[i]) break;
            coord[i] = 0;
        }
    }

    Generated g{MarkovKernel::from_conductances(static_cast<Index>(n), edges), {}};
    g.spec.family = "torus";
    g.spec.sides = sides;
    g.spec.theta = 2.0;
    g.spec.origin = 0;
    long long pole = 0, diam = 0;
    for (std::size_t i = 0; i < dims; ++i) {
        pole += (sides[i] / 2) * stride[i];
        diam += sides[i] / 2;
    }
    g.spec.pole = static_cast<Index>(pole);
    g.spec.known_diameter = static_cast<Index>(diam);
    fill_counts(g.spec, g.kernel);
    return g;
}

Generated cycle_graph(long long n) {
    Generated g = rectangular_torus({n});
    g.spec.family = "cycle";
    g.spec.N = n;
    g.spec.sides.clear();
    return g;
}

Generated complete_graph(long long m) {
    if (m < 2 || m > 5000) throw std::invalid_argument("complete graph size out of range");
    std::vector<WeightedEdge> edges;
    for (Index u = 0; u < m; ++u)
        for (Index v = u + 1; v < m; ++v) edges.push_back({u, v, 1.0});
    Generated g{MarkovKernel::from_conductances(static_cast<Index>(m), edges), {}};
    g.spec.family = "complete";
    g.spec.N = m;
    g.spec.theta = 2.0;
    g.spec.origin = 0;
    g.spec.pole = static_cast<Index>(m - 1);
    g.spec.known_diameter = 1;
    fill_counts(g.spec, g.kernel);
    return g;
}

Generated sierpinski(int k) {
    if (k < 1 || k > 9) throw std::invalid_argument("sierpinski level out of range");
    // Triangular-lattice coordinates (u, v) meaning u*e1 + v*e2 with
    // e1, e2 the two unit directions of the big triangle.  Recursively
    // subdivide the corner triangle of side 2^(k-1) down to unit triangles
    // and emit the three edges of each unit triangle; unit triangles are
    // disjoint edge-wise, so no deduplication is needed.
    CoordIds ids;
    std::vector<WeightedEdge> edges;
    long long side = ipow(2, k - 1);

    struct Frame {
        long long x, y, s;
    };
    std::vector<Frame> stack{{0, 0, side}};
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (f.s == 1) {
            Index a = ids.get(f.x, f.y);
            Index b = ids.get(f.x + 1, f.y);
            Index c = ids.get(f.x, f.y + 1);
            edges.push_back({a, b, 1.0});
            edges.push_back({a, c, 1.0});
            edges.push_back({b, c, 1.0});
        } else {
            long long h = f.s / 2;
            // Push in reverse so the (0,0) copy is processed first.
            stack.push_back({f.x, f.y + h, h});
            stack.push_back({f.x + h, f.y, h});
            stack.push_back({f.x, f.y, h});
        }
    }

    Generated g{MarkovKernel::from_conductances(ids.next, edges), {}};
    g.spec.family = "sierpinski";
    g.spec.k = k;
    g.spec.theta = std::log(5.0) / std::log(2.0);
    g.spec.origin = ids.get(0, 0);
    g.spec.pole = ids.get(side, 0);
    g.spec.known_diameter = static_cast<Index>(side);
    fill_counts(g.spec, g.kernel);
    return g;
}

Generated vicsek(int k) {
    if (k < 0 || k > 7) throw std::invalid_argument("vicsek level out of range");
    // Level 0: center (0,0) joined to the four diagonal corners (+-1, +-1).
    // Level j: the level j-1 set plus four copies translated by
    // (+-2*3^(j-1), +-2*3^(j-1)); each copy shares exactly one corner vertex
    // with the centre, so the graph stays a tree.
    std::vector<std::pair<std::int64_t, std::int64_t>> pts = {
        {0, 0}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    std::vector<std::array<std::int64_t, 4>> segs = {
        {0, 0, 1, 1}, {0, 0, 1, -1}, {0, 0, -1, 1}, {0, 0, -1, -1}};
    for (int j = 1; j <= k; ++j) {
        std::int64_t t = 2 * ipow(3, j - 1);
        auto base_pts = pts;
        auto base_segs = segs;
        for (std::int64_t sx : {-t, t})
            for (std::int64_t sy : {-t, t}) {
                for (auto [x, y] : base_pts) pts.push_back({x + sx, y + sy});
                for (auto s : base_segs)
                    segs.push_back({s[0] + sx, s[1] + sy, s[2] + sx, s[3] + sy});
            }
    }
    CoordIds ids;
    for (auto [x, y] : pts) ids.get(x, y);  // first-seen order, duplicates merge
    std::vector<WeightedEdge> edges;
    edges.reserve(segs.size());
    for (auto s : segs)
        edges.push_back({ids.get(s[0], s[1]), ids.get(s[2], s[3]), 1.0});

    Generated g{MarkovKernel::from_conductances(ids.next, edges), {}};
    g.spec.family = "vicsek";
    g.spec.k = k;
    g.spec.theta = 1.0 + std::log(5.0) / std::log(3.0);
    std::int64_t c = ipow(3, k);
    g.spec.origin = ids.get(-c, -c);
    g.spec.pole = ids.get(c, c);
    g.spec.known_diameter = static_cast<Index>(2 * c);
    fill_counts(g.spec, g.kernel);
    return g;
}

namespace {

// Half-width of the 2d trace at abscissa x.  Boundary points are included;
// the common exponents get exact integer tests.
bool trace2d_member(long long x, long long y, double alpha) {
    if (x == 0) return y == 0;
    long long a = std::llabs(y);
    if (alpha == 1.0) return a <= x;
    if (alpha == 0.5) return a * a <= x;
    return static_cast<double>(a) <=
           std::pow(static_cast<double>(x), alpha) * (1.0 + 4e-15) + 1e-12;
}

double trace3d_radius(long long x, double alpha, double beta) {
    if (x == 0) return 0.0;
    return std::pow(static_cast<double>(x), alpha) *
           std::pow(std::log1p(static_cast<double>(x)), beta);
}

}  // namespace

Generated trace_2d(double alpha, long long N) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("trace2d needs alpha in (0,1]");
    if (N < 2 || N > 5000) throw std::invalid_argument("trace2d size out of range");
    // Column extents, then contiguous ids column by column (y ascending).
    std::vector<long long> half(N + 1, 0);
    std::vector<long long> start(N + 2, 0);
    for (long long x = 0; x <= N; ++x) {
        long long h = 0;
        while (trace2d_member(x, h + 1, alpha)) ++h;
        half[x] = h;
        start[x + 1] = start[x] + 2 * h + 1;
    }
    auto id = [&](long long x, long long y) {
        return static_cast<Index>(start[x] + (y + half[x]));
    };
    std::vector<WeightedEdge> edges;
    for (long long x = 0; x <= N; ++x)
        for (long long y = -half[x]; y <= half[x]; ++y) {
            if (y + 1 <= half[x]) edges.push_back({id(x, y), id(x, y + 1), 1.0});
            if (x + 1 <= N && std::llabs(y) <= half[x + 1])
                edges.push_back({id(x, y), id(x + 1, y), 1.0});
        }

    Generated g{MarkovKernel::from_conductances(static_cast<Index>(start[N + 1]), edges), {}};
    g.spec.family = "trace2d";
    g.spec.alpha = alpha;
    g.spec.N = N;
    g.spec.theta = 2.0;
    g.spec.origin = id(0, 0);
    g.spec.pole = id(N, 0);
    // Columns are intervals growing with x, so graph distance is the L1
    // distance and the diameter decomposes over column extremes.
    {
        bool monotone = true;
        long long lo = std::numeric_limits<long long>::min(), hi = lo;
        for (long long x = 0; x <= N; ++x) {
            if (x > 0 && half[x] < half[x - 1]) monotone = false;
            lo = std::max(lo, half[x] - x);
            hi = std::max(hi, half[x] + x);
        }
        if (monotone) g.spec.known_diameter = static_cast<Index>(lo + hi);
    }
    fill_counts(g.spec, g.kernel);
    return g;
}

Generated trace_3d(double alpha, double beta, long long N) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("trace3d needs alpha in (0,1)");
    if (N < 2 || N > 2000) throw std::invalid_argument("trace3d size out of range");
    // Slab-by-slab ids: within slab x, points (y,z) sorted by (y,z).
    std::map<std::tuple<long long, long long, long long>, Index> ids;
    Index next = 0;
    std::vector<std::pair<std::array<long long, 3>, Index>> pts;
    bool monotone = true;
    double prev_r2 = -1.0;
    long long diam_lo = std::numeric_limits<long long>::min(), diam_hi = diam_lo;
    for (long long x = 0; x <= N; ++x) {
        double r = trace3d_radius(x, alpha, beta);
        double r2 = r * r * (1.0 + 8e-15) + 1e-12;
        if (r2 < prev_r2) monotone = false;
        prev_r2 = r2;
        long long ymax = static_cast<long long>(std::floor(r + 1e-9));
        long long l1max = 0;
        for (long long y = -ymax; y <= ymax; ++y)
            for (long long z = -ymax; z <= ymax; ++z)
                if (static_cast<double>(y) * y + static_cast<double>(z) * z <= r2) {
                    ids[{x, y, z}] = next;
                    pts.push_back({{x, y, z}, next});
                    ++next;
                    l1max = std::max(l1max, std::llabs(y) + std::llabs(z));
                }
        diam_lo = std::max(diam_lo, l1max - x);
        diam_hi = std::max(diam_hi, l1max + x);
    }
    std::vector<WeightedEdge> edges;
    for (const auto& [c, u] : pts) {
        auto [x, y, z] = std::tuple{c[0], c[1], c[2]};
        const std::array<std::array<long long, 3>, 3> steps = {
            {{x + 1, y, z}, {x, y + 1, z}, {x, y, z + 1}}};
        for (const auto& s : steps) {
            auto it = ids.find({s[0], s[1], s[2]});
            if (it != ids.end()) edges.push_back({u, it->second, 1.0});
        }
    }

    Generated g{MarkovKernel::from_conductances(next, edges), {}};
    g.spec.family = "trace3d";
    g.spec.alpha = alpha;
    g.spec.beta = beta;
    g.spec.N = N;
    g.spec.theta = 2.0;
    g.spec.origin = ids.at({0, 0, 0});
    g.spec.pole = ids.at({N, 0, 0});
    // Disk sections growing with x make the graph metric the L1 metric
    // (one of the two L-corners between any two disk points lies inside),
    // so the diameter decomposes over per-slab L1 extremes.
    if (monotone) g.spec.known_diameter = static_cast<Index>(diam_lo + diam_hi);
    fill_counts(g.spec, g.kernel);
    return g;
}

Generated birth_death_metropolis(double alpha, long long N) {
    if (N < 2 || N > 2'000'000) throw std::invalid_argument("birth-death size out of range");
    if (!std::isfinite(alpha)) throw std::invalid_argument("alpha must be finite");
    // Unnormalized vertex weights w_i = (1+i)^alpha double as strengths:
    // c(i,i+1) = min(w_i, w_{i+1})/2 gives the Metropolis rates and the
    // diagonal absorbs the slack, so p_i = c(i,i+1)/w_i = min(1, w_{i+1}/w_i)/2.
    std::vector<double> w(N + 1);
    for (long long i = 0; i <= N; ++i)
        w[i] = std::pow(static_cast<double>(1 + i), alpha);
    std::vector<WeightedEdge> edges;
    std::vector<double> hold(N + 1);
    for (long long i = 0; i <= N; ++i) hold[i] = w[i];
    for (long long i = 0; i < N; ++i) {
        double c = 0.5 * std::min(w[i], w[i + 1]);
        edges.push_back({static_cast<Index>(i), static_cast<Index>(i + 1), c});
        hold[i] -= c;
        hold[i + 1] -= c;
    }
    for (long long i = 0; i <= N; ++i)
        if (hold[i] > 0.0)
            edges.push_back({static_cast<Index>(i), static_cast<Index>(i), hold[i]});

    Generated g{MarkovKernel::from_conductances(static_cast<Index>(N + 1), edges), {}};
    g.spec.family = "birth_death";
    g.spec.alpha = alpha;
    g.spec.N = N;
    g.spec.theta = 2.0;
    g.spec.origin = 0;
    g.spec.pole = static_cast<Index>(N);
    g.spec.known_diameter = static_cast<Index>(N);
    fill_counts(g.spec, g.kernel);
    return g;
}

Generated heisenberg_cayley(long long N) {
    if (N < 2 || N > 40) throw std::invalid_argument("heisenberg size out of range");
    long long n = N * N * N;
    auto idx = [N](long long a, long long b, long long c) {
        return static_cast<Index>((a * N + b) * N + c);
    };
    auto mod = [N](long long v) { return ((v % N) + N) % N; };
    // Group law (a,b,c)*(a',b',c') = (a+a', b+b'+a c', c+c') for the matrix
    // [[1,a,b],[0,1,c],[0,0,1]].  Right-multiplication by the four
    // elementary generators; parallel generator edges merge with doubled
    // weight (this happens for N = 2 where s = s^{-1}).
    std::map<std::pair<Index, Index>, double> acc;
    for (long long a = 0; a < N; ++a)
        for (long long b = 0; b < N; ++b)
            for (long long c = 0; c < N; ++c) {
                Index u = idx(a, b, c);
                const std::array<std::array<long long, 3>, 4> gens = {
                    {{1, 0, 0}, {N - 1, 0, 0}, {0, 0, 1}, {0, 0, N - 1}}};
                for (const auto& s : gens) {
                    Index v = idx(mod(a + s[0]), mod(b + s[1] + a * s[2]), mod(c + s[2]));
                    auto key = u < v ? std::pair{u, v} : std::pair{v, u};
                    acc[key] += 0.5;  // each undirected edge visited from both ends
                }
            }
    std::vector<WeightedEdge> edges;
    edges.reserve(acc.size());
    for (const auto& [key, wgt] : acc) edges.push_back({key.first, key.second, wgt});

    MarkovKernel plain = MarkovKernel::from_conductances(static_cast<Index>(n), edges);
    Generated g{plain.lazify(0.5), {}};
    g.spec.family = "heisenberg";
    g.spec.N = N;
    g.spec.theta = 2.0;
    g.spec.origin = idx(0, 0, 0);
    g.spec.pole = farthest_vertex(g.kernel, g.spec.origin);
    g.spec.notes.push_back("emitted with laziness 1/2");
    fill_counts(g.spec, g.kernel);
    return g;
}

Generated lamplighter(const Generated& base) {
    const MarkovKernel& bk = base.kernel;
    Index L = bk.size();
    if (L > 16) throw std::invalid_argument("lamplighter base too large (max 16 vertices)");
    Index n = static_cast<Index>((1u << L) * static_cast<unsigned>(L));
    auto id = [L](std::uint32_t config, Index v) {
        return static_cast<Index>(config * static_cast<std::uint32_t>(L) + v);
    };
    std::uint32_t nconf = 1u << L;

    // Conductances inherit the base scale: moving along base edge {v,w}
    // splits c_base(v,w) over the four lamp outcomes at v and w; holding at v
    // splits c_base(v,v) over the two outcomes at v.
    std::vector<WeightedEdge> edges;
    for (Index v = 0; v < L; ++v) {
        auto cols = bk.neighbors(v);
        auto vals = bk.conductances(v);
        for (std::size_t i = 0; i < cols.size(); ++i) {
            Index w = cols[i];
            double c = vals[i];
            if (c == 0.0) continue;
            if (w == v) {
                double half = c / 2.0;
                for (std::uint32_t f = 0; f < nconf; ++f) {
                    edges.push_back({id(f, v), id(f, v), half});  // lamp kept
                    if (!(f & (1u << v)))
                        edges.push_back({id(f, v), id(f ^ (1u << v), v), half});
                }
            } else if (w > v) {
                double quarter = c / 4.0;
                std::uint32_t mv = 1u << v, mw = 1u << w;
                for (std::uint32_t f = 0; f < nconf; ++f)
                    for (std::uint32_t flip : {0u, mv, mw, mv | mw})
                        edges.push_back({id(f, v), id(f ^ flip, w), quarter});
            }
        }
    }

    Generated g{MarkovKernel::from_conductances(n, edges), {}};
    g.spec.family = "lamplighter";
    g.spec.base = base.spec.label();
    g.spec.theta = base.spec.theta;
    g.spec.origin = id(0, base.spec.origin);
    g.spec.pole = farthest_vertex(g.kernel, g.spec.origin);
    fill_counts(g.spec, g.kernel);
    return g;
}

Generated make_family(const std::string& family,
                      const std::vector<std::pair<std::string, std::string>>& params) {
    std::map<std::string, std::string> p(params.begin(), params.end());
    auto need = [&](const std::string& key) {
        auto it = p.find(key);
        if (it == p.end())
            throw std::invalid_argument(family + " requires parameter '" + key + "'");
        return it->second;
    };
    auto opt = [&](const std::string& key, const std::string& fallback) {
        auto it = p.find(key);
        return it == p.end() ? fallback : it->second;
    };

    if (family == "torus") {
        std::vector<long long> sides;
        std::stringstream ss(need("sides"));
        std::string part;
        while (std::getline(ss, part, 'x')) sides.push_back(std::stoll(part));
        return rectangular_torus(sides);
    }
    if (family == "cycle") return cycle_graph(std::stoll(need("n")));
    if (family == "complete") return complete_graph(std::stoll(need("n")));
    if (family == "sierpinski") return sierpinski(std::stoi(need("k")));
    if (family == "vicsek") return vicsek(std::stoi(need("k")));
    if (family == "trace2d")
        return trace_2d(std::stod(need("alpha")), std::stoll(need("N")));
    if (family == "trace3d")
        return trace_3d(std::stod(need("alpha")), std::stod(opt("beta", "0")),
                        std::stoll(need("N")));
    if (family == "birth_death")
        return birth_death_metropolis(std::stod(need("alpha")), std::stoll(need("N")));
    if (family == "heisenberg") return heisenberg_cayley(std::stoll(need("N")));
    if (family == "lamplighter") {
        std::string b = need("base");
        auto colon = b.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("lamplighter base must be tag:size, e.g. cycle:6");
        std::string tag = b.substr(0, colon);
        long long size = std::stoll(b.substr(colon + 1));
        if (tag == "cycle") return lamplighter(cycle_graph(size));
        if (tag == "complete") return lamplighter(complete_graph(size));
        throw std::invalid_argument("unsupported lamplighter base tag: " + tag);
    }
    throw std::invalid_argument("unknown family: " + family);
}

}  // namespace hittimes
