#pragma once

#include "gapbound/types.hpp"

namespace gapbound {

/// Decaying-sinusoid upper envelope C e^{-k s} (1 + S sin(omega s + phi)).
/// S < 1 keeps the value strictly positive. The degenerate all-zero sample
/// set is represented by the dedicated zero variant (value identically 0),
/// which is the only way C = 0 can occur.
struct EnvelopeSpec {
    double C = 0.0;
    double k = 0.0;
    double S = 0.0;
    double omega = 0.0;
    double phi = 0.0;
    bool zero = false;

    double value(double s) const {
        if (zero) {
            return 0.0;
        }
        return C * std::exp(-k * s) * (1.0 + S * std::sin(omega * s + phi));
    }

    static EnvelopeSpec zero_envelope() {
        EnvelopeSpec e;
        e.zero = true;
        return e;
    }
};

/// Spectral norm of e^{A_inf s} sampled over the grid.
std::vector<double> sample_expm_norm(const Matrix& A_inf, const Grid& grid);

/// Fit a dominating envelope to nonnegative decaying samples.
///
/// Stages: log-least-squares through the tail half of the sample crests for
/// the decay rate, least-squares lock of the oscillation frequency on the
/// detrended residual, minimax depth/phase selection, multiplicative
/// inflation, and a final lift so domination holds at every grid sample. If
/// the lift exceeds 20% the decay rate is relaxed (5% per pass, at most 12
/// passes) before lifting, so sub-cutoff straggler samples cannot force an
/// absurd amplitude. Throws std::runtime_error when the samples do not decay
/// (fitted rate <= 0); all-zero samples yield the zero envelope.
EnvelopeSpec fit_envelope(const std::vector<double>& samples, const Grid& grid,
                          double inflation = 0.05);

/// Pure-exponential envelope beta e^{-c s} certified by the Lyapunov
/// quadratic form. The loose flag reports that the certificate overshoots
/// the sampled norm curve more than tenfold somewhere on its own decay span
/// (typical for strongly non-normal matrices).
struct Lemma3Envelope {
    EnvelopeSpec spec;
    bool loose = false;
};

Lemma3Envelope lemma3_envelope(const Matrix& A_inf);

/// Closed-form integral of the envelope over [0, t].
double integrate_envelope(const EnvelopeSpec& env, double t);

/// Composite-trapezoid value of the convolution-style integral
/// int_0^t env_exp(t - s) env_dA(s) ds. quad_step <= 0 selects the default
/// step min(0.005, t/2000).
double integrate_envelope_product(const EnvelopeSpec& env_exp, const EnvelopeSpec& env_dA, double t,
                                  double quad_step = 0.0);

/// Shared quadrature-node policy: number of uniform intervals covering
/// [0, t] at spacing <= step (step <= 0 selects the default policy).
int quad_intervals(double t, double step);

} // namespace gapbound
