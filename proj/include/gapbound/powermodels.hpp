#pragma once

#include "gapbound/types.hpp"

namespace gapbound {

/// Second-order synchronous machine: mechanical constants, stator-network
/// reactances, and the constant mechanical power input. Defaults are the
/// simulation values used throughout the built-in scenarios.
struct GeneratorParams {
    double M = 13.0;      // mechanical starting time, kWs/kVA
    double f = 60.0;      // nominal frequency, Hz
    double Omega_b = 2.0 * 3.14159265358979323846 * 60.0; // base speed, rad/s
    double xd_p = 0.2;    // d-axis transient reactance, p.u.
    double xq_p = 0.4;    // q-axis transient reactance, p.u.
    double xl = 0.15;     // leakage reactance, p.u.
    double V = 1.0;       // bus voltage magnitude, p.u.
    double ed_p = 0.1;    // d-axis transient potential, p.u.
    double eq_p = 0.9;    // q-axis transient potential, p.u.
    double ra = 0.0005;   // armature resistance, p.u.
    double Pm = 1.0;      // mechanical power input, p.u.
    double D = 100.0;     // damping coefficient
};

/// Turbine-governor extension: droop control with torque saturation and a
/// three-stage turbine lag chain. T_order is the power setpoint feeding the
/// droop sum; default 1.0 so the governed steady state matches the
/// second-order model's constant Pm = 1.
struct GovernorParams {
    double omega_ref = 1.0; // speed reference, p.u.
    double R = 0.02;        // droop gain, p.u.
    double T_max = 1.2;     // torque ceiling, p.u.
    double T_min = 0.3;     // torque floor, p.u.
    double Ts = 0.1;        // governor time constant, s
    double Tc = 0.45;       // first turbine stage, s
    double T3 = 0.0;        // numerator lead of first stage, s
    double T4 = 12.0;       // numerator lead of second stage, s
    double T5 = 50.0;       // second turbine stage, s
    double T_order = 1.0;   // power order setpoint, p.u.
};

/// Outcome of eliminating the stator algebraic constraints at one angle.
struct StatorSolution {
    double id;         // d-axis current, p.u.
    double iq;         // q-axis current, p.u.
    double vd;         // d-axis terminal voltage, p.u.
    double vq;         // q-axis terminal voltage, p.u.
    double Pe;         // electrical (air-gap) power, p.u.
    double Qe;         // reactive power, p.u.
    double Pe_ddelta;  // dPe/ddelta, p.u. per rad
};

/// Throw std::invalid_argument describing the first violated field constraint.
void validate_params(const GeneratorParams& p);
void validate_params(const GovernorParams& gp);

/// Closed-form 2x2 solve of the stator network at rotor angle delta, with
/// the analytic angle-derivative of the electrical power.
StatorSolution stator_solve(double delta, const GeneratorParams& p);

/// Swing dynamics for the state (delta, omega).
Vector generator_rhs(double t, const Vector& x, const GeneratorParams& p);

struct GeneratorJacobians {
    Matrix A;     // d(rhs)/d(state), 2x2
    Vector B_Pm;  // d(rhs)/d(Pm), length 2
};

GeneratorJacobians generator_jacobians(double t, const Vector& x, const GeneratorParams& p);

/// Saturated torque input commanded by the droop loop at speed omega.
double governor_torque_input(double omega, const GovernorParams& gp);

/// Mechanical power produced by the turbine chain state (tg1, tg2, tg3).
double governor_mechanical_power(const Vector& x, const GovernorParams& gp);

/// Five-state dynamics (delta, omega, tg1, tg2, tg3): the swing equation
/// with Pm replaced by the governed turbine output.
Vector governor_rhs(double t, const Vector& x, const GovernorParams& gp, const GeneratorParams& p);

struct ResonanceSweep {
    double w_min = 1e-2;  // rad/s
    double w_max = 1e3;   // rad/s
    int steps = 400;      // log-spaced sweep points
};

/// Frequency of the steady-state gain peak of x' = A_inf x + input_dir * sin.
/// Coarse log sweep followed by golden-section refinement to 1e-4 relative.
/// Throws std::runtime_error when the swept gain has no interior peak.
double resonant_frequency(const Matrix& A_inf, const Vector& input_dir,
                          const ResonanceSweep& sweep = {});

} // namespace gapbound
