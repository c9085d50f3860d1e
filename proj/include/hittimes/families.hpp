// families.hpp — generators for the graph families used in the experiments.
// Each generator returns the kernel together with a FamilySpec describing
// the parameters, the walk-dimension exponent theta used by the volume-sum
// estimator, and a canonical far-apart vertex pair (origin, pole).
#pragma once

#include <string>
#include <vector>

#include "hittimes/kernel.hpp"

namespace hittimes {

struct FamilySpec {
    std::string family;
    std::vector<long long> sides;  // torus side lengths
    double alpha = 0.0;            // traces, birth-death
    double beta = 0.0;             // 3d trace log-correction exponent
    long long N = 0;               // traces / birth-death / heisenberg size
    int k = 0;                     // fractal iteration level
    std::string base;              // lamplighter base label
    double theta = 2.0;
    Index origin = 0;
    Index pole = 0;
    Index vertex_count = 0;
    long long edge_count = 0;
    Index known_diameter = -1;     // exact by construction when >= 0
    std::vector<std::string> notes;

    std::string label() const;     // e.g. "torus(4x4)", "vicsek(k=2)"
    std::string params_string() const;  // e.g. "sides=4x4" / "alpha=2,N=64"
    std::string to_json() const;
    static FamilySpec from_json(const std::string& text);
};

struct Generated {
    MarkovKernel kernel;
    FamilySpec spec;
};

// Product of cycles Z_{a_1} x ... x Z_{a_N} with one move per unit step in a
// coordinate.  Factors of size 1 contribute nothing; a factor of size 2 is a
// single doubled transition.  Canonical pair: origin and coordinatewise
// antipode; diameter = sum floor(a_i/2), exact.
Generated rectangular_torus(const std::vector<long long>& sides);

// Convenience wrappers (theta = 2).
Generated cycle_graph(long long n);            // Z_n
Generated complete_graph(long long m);         // K_m

// Level-k gasket: three level-(k-1) copies glued at corner vertices;
// level 1 is the triangle.  |V| = (3^k + 3)/2, corner-to-corner distance
// 2^(k-1), theta = log 5 / log 2.
Generated sierpinski(int k);

// Level-k cross fractal tree: five level-(k-1) copies, four glued to the
// central one at opposite diagonal corners.  |V_k| = 5|V_{k-1}| - 4 with
// |V_0| = 5, corner-to-corner distance 2*3^k, theta = 1 + log 5 / log 3.
Generated vicsek(int k);

// Lattice trace of the planar region {0 <= x <= N, |y| <= x^alpha} with
// 4-neighbor edges; boundary points included.  alpha in (0, 1].
Generated trace_2d(double alpha, long long N);

// Lattice trace of the solid of revolution {y^2 + z^2 <= (x^alpha
// (log(1+x))^beta)^2, 0 <= x <= N} with 6-neighbor edges; apex at the
// origin.  alpha in (0, 1).
Generated trace_3d(double alpha, double beta, long long N);

// Birth-death chain on {0..N} with vertex weights w_k = (1+k)^alpha and
// Metropolis rates: pi(i) p_i = pi(i+1) q_{i+1} = min(pi(i), pi(i+1)) / 2.
Generated birth_death_metropolis(double alpha, long long N);

// Cayley graph of 3x3 upper unitriangular matrices over Z_N with the four
// elementary generators; emitted with laziness 1/2 so the kernel is
// aperiodic regardless of the parity structure of the parameter N.
Generated heisenberg_cayley(long long N);

// Lamp-lighter chain over a base kernel: states are (lamp configuration,
// walker position); moving along a base edge re-randomizes the lamps at the
// two endpoints, holding re-randomizes the lamp under the walker.
Generated lamplighter(const Generated& base);

// Dispatch by family tag with "key=value" parameters; used by the CLI.
Generated make_family(const std::string& family,
                      const std::vector<std::pair<std::string, std::string>>& params);

}  // namespace hittimes
