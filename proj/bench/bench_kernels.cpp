// Times the serial convolution-table reference against the OpenMP variant on
// a case-study-sized workload and checks that their outputs are identical.

#include "gapbound/kernels.hpp"
#include "gapbound/types.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using Clock = std::chrono::steady_clock;

double best_of(int reps, const std::function<void()>& work) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto start = Clock::now();
        work();
        const std::chrono::duration<double, std::milli> took = Clock::now() - start;
        best = std::min(best, took.count());
    }
    return best;
}

bool identical(const gapbound::ConvTable& a, const gapbound::ConvTable& b) {
    if (a.totals != b.totals || a.prefixes.size() != b.prefixes.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.prefixes.size(); ++i) {
        if (a.prefixes[i] != b.prefixes[i]) {
            return false;
        }
    }
    return true;
}

} // namespace

int main() {
    using namespace gapbound;

    const EnvelopeSpec env_exp{12.4, 0.28, 0.35, 2.1, 0.4, false};
    const EnvelopeSpec env_dA{1.1, 2.8, 0.3, 62.0, -0.2, false};
    const Grid times = make_grid(0.0, 20.0, 0.005);
    const std::vector<double> edges = make_grid(0.0, 20.0, 2.0);
    const ConvWeight weight = [](double s) { return 1.0 + 0.1 * std::sin(3.0 * s); };

    std::printf("convolution table: %zu upper limits, %zu prefix edges\n", times.size(),
                edges.size());
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP not available; both variants run serially\n");
#endif

    ConvTable serial_out;
    ConvTable parallel_out;
    // Warm-up pass so neither timing pays first-touch costs.
    conv_table_serial(env_exp, env_dA, {1.0, 2.0}, 0.0, weight, edges);
    conv_table_parallel(env_exp, env_dA, {1.0, 2.0}, 0.0, weight, edges);

    const double t_serial = best_of(3, [&] {
        serial_out = conv_table_serial(env_exp, env_dA, times, 0.0, weight, edges);
    });
    const double t_parallel = best_of(3, [&] {
        parallel_out = conv_table_parallel(env_exp, env_dA, times, 0.0, weight, edges);
    });

    std::printf("serial reference : %9.2f ms\n", t_serial);
    std::printf("parallel kernel  : %9.2f ms\n", t_parallel);
    std::printf("speedup          : %9.2fx\n", t_serial / t_parallel);

    const bool same = identical(serial_out, parallel_out);
    std::printf("outputs identical: %s\n", same ? "yes" : "NO");
    return same ? 0 : 1;
}
