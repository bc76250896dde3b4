#pragma once

#include "gapbound/envelopes.hpp"
#include "gapbound/ode.hpp"
#include "gapbound/sensitivity.hpp"
#include "gapbound/types.hpp"

#include <vector>

namespace gapbound {

enum class BoundKind { bound1, bound1_tight, bound2, theorem2 };

/// Per-time entrywise envelope around the sensitivity trajectory. The
/// asymmetric kind carries the reduced-model solution as center with bands
/// center +/- radius; the symmetric kinds have an empty center and bands
/// -radius .. +radius. radius keeps the underlying norm-level radius so
/// looseness diagnostics do not have to reconstruct it from the bands.
struct BoundResult {
    Grid times;
    std::vector<Vector> center; // empty for the symmetric kinds
    std::vector<Vector> lower;
    std::vector<Vector> upper;
    BoundKind kind = BoundKind::bound1;
    double scale = 1.0; // disturbance magnitude folded into the envelopes
    std::vector<double> radius;
};

/// Frozen-matrix comparison solution: integrates z' = A_inf z + u(t) from
/// z(0) = 0 over the system horizon.
Trajectory z_lti(const LTVSystem& sys, const IntegratorOptions& ctrl = {});

/// g(t) = integral over [0,t] of env_exp(t-s) * env_dA(s) * ||z_lti(s)||_2,
/// the forcing term of the drift bound, on the given evaluation grid.
std::vector<double> g_of_t(const LTVSystem& sys, const Trajectory& zlti,
                           const EnvelopeSpec& env_exp, const EnvelopeSpec& env_dA,
                           const Grid& grid, double quad_step = 0.0);

/// Drift bound around the frozen-matrix solution: radius
/// r(t) = g(t) + (causal running max of g) * (e^{H(t)} - 1) with
/// H(t) = integral of env_exp(t-s) * env_dA(s); bands are z_lti +/- r per
/// entry.
BoundResult bound1(const LTVSystem& sys, const Trajectory& zlti, const std::vector<double>& g,
                   const EnvelopeSpec& env_exp, const EnvelopeSpec& env_dA, const Grid& grid,
                   double quad_step = 0.0);

/// Partitioned refinement of bound1: the running max of g is replaced by
/// per-piece maxima weighted by the decay accumulated across each piece.
/// Shares the H quadrature with bound1, so its radius never exceeds
/// bound1's beyond roundoff. The partition must cover the grid span and
/// increase strictly.
BoundResult bound1_tight(const LTVSystem& sys, const Trajectory& zlti, const std::vector<double>& g,
                         const EnvelopeSpec& env_exp, const EnvelopeSpec& env_dA, const Grid& grid,
                         const std::vector<double>& partition, double quad_step = 0.0);

/// Symmetric norm bound on the full sensitivity:
/// ||z(t)|| <= ||z_lti(t)|| + (running max of ||z_lti||) * (e^{H(t)} - 1).
BoundResult bound2(const LTVSystem& sys, const Trajectory& zlti, const EnvelopeSpec& env_exp,
                   const EnvelopeSpec& env_dA, const Grid& grid, double quad_step = 0.0);

/// Input-magnitude bound that needs no forcing trajectory: with
/// a(t) = integral of env_exp and M_u the per-entry forcing magnitude,
/// radius = K2inf * M_u * (a(t) + running max a * (e^{H(t)} - 1)).
/// K2inf = 0 selects the default sqrt(dimension).
BoundResult theorem2_bound(const LTVSystem& sys, double M_u, double K2inf,
                           const EnvelopeSpec& env_exp, const EnvelopeSpec& env_dA,
                           const Grid& grid, double quad_step = 0.0);

/// Transient-vs-tail summary of ||z - z_lti||: peak over the common span,
/// max over the trailing tail_fraction of it, and their ratio (0 when the
/// peak is 0).
struct ConvergenceReport {
    double peak = 0.0;
    double tail = 0.0;
    double ratio = 0.0;
};

ConvergenceReport corollary_convergence(const Trajectory& z, const Trajectory& zlti,
                                        double tail_fraction);

/// Sampled integral-inequality check: rhs receives the conclusion samples
/// alpha(t) + integral of alpha*beta*e^{integral of beta}; gronwall_check
/// returns true iff the conclusion holds at every grid point where the
/// hypothesis gamma <= alpha + integral of beta*gamma holds (trapezoid
/// discretizations throughout).
struct GronwallCheck {
    Grid grid;
    std::vector<double> alpha;
    std::vector<double> beta; // samples must be >= 0
    std::vector<double> gamma;
    std::vector<double> rhs;
};

bool gronwall_check(GronwallCheck& data);

/// First-order conversion from sensitivity bounds to predicted model-gap
/// bounds: every band, center and radius is multiplied by epsilon.
BoundResult scale_to_gap(const BoundResult& b, double epsilon);

} // namespace gapbound
