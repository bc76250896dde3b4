#pragma once

#include "gapbound/types.hpp"

#include <functional>

namespace gapbound {

struct IntegratorOptions {
    double abs_tol = 1e-9;
    double rel_tol = 1e-8;
    double max_step = 0.01;
};

struct OdeSystem {
    int dimension;
    // rhs(t, x, params) -> dx/dt
    std::function<Vector(double, const Vector&, const Vector&)> rhs;
};

/// Dense solution storage: accepted step endpoints plus the rhs value at
/// each, so queries between nodes use cubic Hermite interpolation.
class Trajectory {
public:
    std::vector<double> times;
    std::vector<Vector> states;
    std::vector<Vector> derivs;
    int dimension = 0;

    double t0() const { return times.front(); }
    double t_end() const { return times.back(); }

    /// Interpolated state; exact at stored nodes. Throws std::out_of_range
    /// outside the stored span.
    Vector sample(double t) const;
};

/// Adaptive embedded Runge-Kutta (Dormand-Prince 4(5)) integration.
/// Throws std::runtime_error on step underflow (reports last good time) and
/// std::domain_error if the rhs returns non-finite values.
Trajectory integrate(const OdeSystem& sys, const Vector& x0, double t0, double t_end,
                     const Vector& params, const IntegratorOptions& ctrl = {});

/// Fixed-step classic 4th-order Runge-Kutta (deterministic fallback).
Trajectory integrate_fixed(const OdeSystem& sys, const Vector& x0, double t0, double t_end,
                           const Vector& params, double step);

/// Integrate z' = A(t) z + u(t) from z(t0) = 0.
Trajectory integrate_ltv(const std::function<Matrix(double)>& A_of_t,
                         const std::function<Vector(double)>& u_of_t,
                         int dimension, double t0, double t_end,
                         const IntegratorOptions& ctrl = {});

/// Free-function form of Trajectory::sample.
Vector sample(const Trajectory& traj, double t);

} // namespace gapbound
