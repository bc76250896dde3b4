#pragma once

#include "gapbound/types.hpp"

namespace gapbound {

/// Largest singular value of m. Throws std::domain_error on non-finite input.
double spectral_norm(const Matrix& m);

/// All eigenvalues of a square matrix (unordered).
Spectrum eigenvalues(const Matrix& m);

/// True iff every eigenvalue real part is < -margin.
bool is_hurwitz(const Matrix& m, double margin = 0.0);

/// Matrix exponential (scaling-and-squaring).
Matrix expm(const Matrix& m);

/// Decay certificate for a Hurwitz matrix: ||e^{At}|| <= beta * e^{-c t}.
/// H solves the Lyapunov equation A^T H + H A = -I.
struct LyapunovEnvelope {
    double beta;
    double c;
    Matrix H;
};

/// Solve A^T H + H A = -I for Hurwitz a and derive the decay certificate.
/// beta = sqrt(lmax(H)/lmin(H)); c = 1/(2*lmax(H)): along trajectories of
/// x' = Ax the quadratic form V = x^T H x obeys V' = -||x||^2 <= -V/lmax,
/// so V decays at rate 1/lmax and ||x|| ~ sqrt(V) at half that rate.
/// Throws std::invalid_argument when a is not Hurwitz.
LyapunovEnvelope solve_lyapunov(const Matrix& a);

} // namespace gapbound
