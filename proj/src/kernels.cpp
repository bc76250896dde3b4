#include "gapbound/kernels.hpp"

#include <algorithm>
#include <cstddef>
#include <stdexcept>

namespace gapbound {

namespace {

void check_inputs(double t, const std::vector<double>& abscissae) {
    if (t < 0.0) {
        throw std::invalid_argument("conv_prefix: upper limit must be nonnegative");
    }
    for (std::size_t k = 1; k < abscissae.size(); ++k) {
        if (abscissae[k] < abscissae[k - 1]) {
            throw std::invalid_argument("conv_prefix: abscissae must be nondecreasing");
        }
    }
}

// Trapezoid accumulation strictly left to right on the uniform nodes of
// quad_intervals, matching integrate_envelope_product term for term so the
// weight == 1 totals agree with it and every caller sharing (envelopes,
// weight, quad_step) sees bitwise-identical running integrals.
ConvPrefix conv_prefix_impl(const EnvelopeSpec& env_exp, const EnvelopeSpec& env_dA, double t,
                            double quad_step, const ConvWeight& weight,
                            const std::vector<double>& abscissae) {
    ConvPrefix out;
    out.at.assign(abscissae.size(), 0.0);
    if (t == 0.0 || env_exp.zero || env_dA.zero) {
        return out;
    }
    std::size_t k = 0;
    while (k < abscissae.size() && std::min(abscissae[k], t) <= 0.0) {
        ++k; // clipped abscissa sits at 0: running integral is 0 there
    }
    const int m = quad_intervals(t, quad_step);
    const double h = t / m;
    double acc = 0.0;
    double s_prev = 0.0;
    double prev = env_exp.value(t) * env_dA.value(0.0) * (weight ? weight(0.0) : 1.0);
    for (int j = 1; j <= m; ++j) {
        const double s = (j == m) ? t : j * h;
        const double cur = env_exp.value(t - s) * env_dA.value(s) * (weight ? weight(s) : 1.0);
        const double next = acc + 0.5 * (prev + cur) * h;
        while (k < abscissae.size()) {
            const double e = std::min(abscissae[k], t);
            if (e > s) {
                break;
            }
            out.at[k] = (e >= s) ? next : acc + (e - s_prev) / (s - s_prev) * (next - acc);
            ++k;
        }
        acc = next;
        prev = cur;
        s_prev = s;
    }
    for (; k < abscissae.size(); ++k) {
        out.at[k] = acc; // clipped to t: full integral
    }
    out.total = acc;
    return out;
}

ConvTable conv_table_impl(const EnvelopeSpec& env_exp, const EnvelopeSpec& env_dA,
                          const std::vector<double>& times, double quad_step,
                          const ConvWeight& weight, const std::vector<double>& abscissae,
                          bool parallel) {
    for (double t : times) {
        check_inputs(t, abscissae);
    }
    if (times.empty()) {
        check_inputs(0.0, abscissae);
    }
    ConvTable table;
    table.totals.assign(times.size(), 0.0);
    table.prefixes.resize(times.size());
    const long long n = static_cast<long long>(times.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (long long i = 0; i < n; ++i) {
        ConvPrefix p = conv_prefix_impl(env_exp, env_dA, times[i], quad_step, weight, abscissae);
        table.totals[i] = p.total;
        table.prefixes[i] = std::move(p.at);
    }
#ifndef _OPENMP
    (void)parallel;
#endif
    return table;
}

} // namespace

ConvPrefix conv_prefix(const EnvelopeSpec& env_exp, const EnvelopeSpec& env_dA, double t,
                       double quad_step, const ConvWeight& weight,
                       const std::vector<double>& abscissae) {
    check_inputs(t, abscissae);
    return conv_prefix_impl(env_exp, env_dA, t, quad_step, weight, abscissae);
}

ConvTable conv_table_serial(const EnvelopeSpec& env_exp, const EnvelopeSpec& env_dA,
                            const std::vector<double>& times, double quad_step,
                            const ConvWeight& weight, const std::vector<double>& abscissae) {
    return conv_table_impl(env_exp, env_dA, times, quad_step, weight, abscissae, false);
}

ConvTable conv_table_parallel(const EnvelopeSpec& env_exp, const EnvelopeSpec& env_dA,
                              const std::vector<double>& times, double quad_step,
                              const ConvWeight& weight, const std::vector<double>& abscissae) {
    return conv_table_impl(env_exp, env_dA, times, quad_step, weight, abscissae, true);
}

ConvTable conv_table(const EnvelopeSpec& env_exp, const EnvelopeSpec& env_dA,
                     const std::vector<double>& times, double quad_step, const ConvWeight& weight,
                     const std::vector<double>& abscissae) {
#ifdef _OPENMP
    return conv_table_parallel(env_exp, env_dA, times, quad_step, weight, abscissae);
#else
    return conv_table_serial(env_exp, env_dA, times, quad_step, weight, abscissae);
#endif
}

} // namespace gapbound
