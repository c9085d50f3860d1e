// bench_parallel.cpp — wall-clock comparison of the OpenMP kernels against
// their serial reference implementations: all-source diameter scan,
// symmetric-operator application, and chunked Monte Carlo sampling.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "hittimes/families.hpp"
#include "hittimes/metric.hpp"
#include "hittimes/simulate.hpp"
#include "hittimes/spectral.hpp"

using namespace hittimes;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

void row(const char* name, double serial, double parallel, bool match) {
    std::printf("%-28s %10.3fs %10.3fs %7.2fx   %s\n", name, serial, parallel,
                parallel > 0 ? serial / parallel : 0.0,
                match ? "outputs match" : "OUTPUT MISMATCH");
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads = %d\n\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled\n\n");
#endif
    std::printf("%-28s %11s %11s %8s\n", "kernel", "serial", "parallel",
                "speedup");

    {
        Generated g = rectangular_torus({64, 64});
        auto t0 = clock_type::now();
        DiameterResult ds = diameter_serial(g.kernel, 10000);
        double serial = seconds_since(t0);
        t0 = clock_type::now();
        DiameterResult dp = diameter(g.kernel, 10000);
        double parallel = seconds_since(t0);
        row("diameter torus(64x64)", serial, parallel,
            ds.value == dp.value && ds.exact == dp.exact);
    }

    {
        Generated g = rectangular_torus({48, 48, 8});
        SymmetricOperator op(g.kernel);
        Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(op.size(), 0.0, 1.0);
        Eigen::VectorXd ys(op.size()), yp(op.size());
        const int reps = 400;
        auto t0 = clock_type::now();
        for (int i = 0; i < reps; ++i) op.apply_serial(x, ys);
        double serial = seconds_since(t0);
        t0 = clock_type::now();
        for (int i = 0; i < reps; ++i) op.apply(x, yp);
        double parallel = seconds_since(t0);
        row("spectral apply x400", serial, parallel,
            (ys - yp).lpNorm<Eigen::Infinity>() < 1e-12);
    }

    {
        Generated g = rectangular_torus({32, 32});
        auto t0 = clock_type::now();
        SampleStats ss = sample_hitting_serial(g.kernel, g.spec.origin,
                                               g.spec.pole, 20000, 7);
        double serial = seconds_since(t0);
        t0 = clock_type::now();
        SampleStats sp =
            sample_hitting(g.kernel, g.spec.origin, g.spec.pole, 20000, 7);
        double parallel = seconds_since(t0);
        row("mc hitting 20k trials", serial, parallel,
            ss.mean == sp.mean && ss.variance == sp.variance &&
                ss.cap_hits == sp.cap_hits);
    }

    return 0;
}
