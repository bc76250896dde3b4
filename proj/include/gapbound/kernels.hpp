#pragma once

#include "gapbound/envelopes.hpp"

#include <functional>
#include <vector>

namespace gapbound {

/// Pointwise weight multiplied into the convolution integrand; an empty
/// function means weight == 1.
using ConvWeight = std::function<double(double)>;

/// Running integral of env_exp(t - s) * env_dA(s) * weight(s) over [0, t]
/// for one upper limit t: the full value plus the running integral read off
/// at each requested abscissa (clipped to [0, t], linear interpolation
/// between quadrature nodes, exact at 0 and t).
struct ConvPrefix {
    double total = 0.0;
    std::vector<double> at;
};

ConvPrefix conv_prefix(const EnvelopeSpec& env_exp, const EnvelopeSpec& env_dA, double t,
                       double quad_step, const ConvWeight& weight = {},
                       const std::vector<double>& abscissae = {});

/// Batch form over a grid of upper limits: totals[i] integrates over
/// [0, times[i]], prefixes[i][k] is the running integral at abscissae[k]
/// clipped to times[i]. The serial and parallel variants execute identical
/// per-point arithmetic (threads split whole grid points), so their outputs
/// are bitwise equal; the serial one is the reference kept for testing.
struct ConvTable {
    std::vector<double> totals;
    std::vector<std::vector<double>> prefixes;
};

ConvTable conv_table_serial(const EnvelopeSpec& env_exp, const EnvelopeSpec& env_dA,
                            const std::vector<double>& times, double quad_step,
                            const ConvWeight& weight = {},
                            const std::vector<double>& abscissae = {});

ConvTable conv_table_parallel(const EnvelopeSpec& env_exp, const EnvelopeSpec& env_dA,
                              const std::vector<double>& times, double quad_step,
                              const ConvWeight& weight = {},
                              const std::vector<double>& abscissae = {});

/// Dispatches to the parallel variant when compiled with OpenMP, otherwise
/// falls back to the serial reference.
ConvTable conv_table(const EnvelopeSpec& env_exp, const EnvelopeSpec& env_dA,
                     const std::vector<double>& times, double quad_step,
                     const ConvWeight& weight = {},
                     const std::vector<double>& abscissae = {});

} // namespace gapbound
