#pragma once

#include "gapbound/ode.hpp"
#include "gapbound/types.hpp"

#include <functional>

namespace gapbound {

/// A parameterized vector field dx/dt = f(t, x, lambda) with optional
/// analytic Jacobians. When a Jacobian is absent the finite-difference
/// fallback is used in its place.
struct ParametricModel {
    int dimension = 0;
    int param_count = 0;
    std::function<Vector(double, const Vector&, const Vector&)> rhs;
    std::function<Matrix(double, const Vector&, const Vector&)> jac_x;      // dimension x dimension
    std::function<Matrix(double, const Vector&, const Vector&)> jac_lambda; // dimension x param_count
};

/// Linear time-varying system z' = A(t) z + u(t) on [t0, t_end] whose state
/// matrix settles to the Hurwitz limit A_inf by the end of the horizon.
/// Construct through make_ltv_system so the structural assumptions are
/// checked up front.
struct LTVSystem {
    int dimension = 0;
    std::function<Matrix(double)> A_of_t;
    std::function<Vector(double)> u_of_t;
    Matrix A_inf;
    double t0 = 0.0;
    double t_end = 0.0;
    double steady_tol = 1e-4;
};

/// Validating constructor: rejects a non-Hurwitz limit matrix and a state
/// matrix still drifting at the end of the horizon (both assumption_error).
LTVSystem make_ltv_system(int dimension, std::function<Matrix(double)> A_of_t,
                          std::function<Vector(double)> u_of_t, Matrix A_inf, double t0,
                          double t_end, double steady_tol = 1e-4);

enum class JacobianTarget { state, param };

/// Central-difference Jacobian of the model rhs at (t, x, lambda), taken
/// with respect to the state or the parameter vector.
Matrix jacobian_fd(const ParametricModel& model, double t, const Vector& x, const Vector& lambda,
                   JacobianTarget which);

/// Sensitivity system for parameter perturbations: A(t) is the state
/// Jacobian along the nominal trajectory, u(t) the parameter Jacobian
/// column, A_inf the state Jacobian at the final nominal state.
/// Requires param_count == 1 (the pipeline studies one scalar parameter).
LTVSystem build_param_sensitivity(const ParametricModel& model, const Trajectory& nominal,
                                  const Vector& lambda);

/// Same state matrix as build_param_sensitivity, but the forcing is only
/// known by magnitude: M_u bounds |(df/dlambda) dlambda| per entry over the
/// nominal trajectory for any disturbance with unit sup norm.
struct DisturbanceChannel {
    LTVSystem sys; // u_of_t is identically zero; only A_of_t / A_inf are meaningful
    double M_u = 0.0;
};

DisturbanceChannel build_bounded_disturbance_sensitivity(const ParametricModel& model,
                                                         const Trajectory& nominal,
                                                         const Vector& lambda);

/// Integrate the parameter sensitivity z' = A(t) z + u(t), z(t0) = 0.
Trajectory sensitivity_to_params(const LTVSystem& sys, const IntegratorOptions& ctrl = {});

/// Sensitivity to the initial state: Z' = A(t) Z, Z(t0) = I, integrated
/// column-wise and stored as a column-major n^2 state.
Trajectory sensitivity_to_x0(const ParametricModel& model, const Trajectory& nominal,
                             const Vector& lambda, const IntegratorOptions& ctrl = {});

/// Reshape one time slice of a column-major matrix-valued trajectory.
Matrix sensitivity_matrix_at(const Trajectory& traj, int n, double t);

/// Sensitivity to the initial time: z' = A(t) z, z(t0) = -f(t0, x0, lambda).
Trajectory sensitivity_to_t0(const ParametricModel& model, const Trajectory& nominal,
                             const Vector& lambda, const IntegratorOptions& ctrl = {});

} // namespace gapbound
