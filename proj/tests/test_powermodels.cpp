#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gapbound/ode.hpp"
#include "gapbound/powermodels.hpp"

#include <cmath>

using namespace gapbound;

namespace {

// Bisect Pe(delta) = Pm over a scanned sign change.
double find_equilibrium_delta(const GeneratorParams& p) {
    auto imbalance = [&](double d) { return stator_solve(d, p).Pe - p.Pm; };
    double lo = -2.2, hi = -1.0;
    const int scan = 50;
    double a = lo, b = hi;
    bool found = false;
    for (int i = 0; i < scan; ++i) {
        const double l = lo + (hi - lo) * i / scan;
        const double r = lo + (hi - lo) * (i + 1) / scan;
        if (imbalance(l) * imbalance(r) <= 0.0) {
            a = l;
            b = r;
            found = true;
            break;
        }
    }
    REQUIRE(found);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (a + b);
        if (imbalance(a) * imbalance(mid) <= 0.0) {
            b = mid;
        } else {
            a = mid;
        }
    }
    return 0.5 * (a + b);
}

} // namespace

TEST_CASE("stator_solve: algebraic residuals vanish") {
    GeneratorParams p;
    for (double delta : {-M_PI / 2.0 - 0.5, -1.2, 0.3, 2.0}) {
        const auto s = stator_solve(delta, p);
        const double res_q = s.vq + p.ra * s.iq - p.eq_p + (p.xd_p - p.xl) * s.id;
        const double res_d = s.vd + p.ra * s.id - p.ed_p - (p.xq_p - p.xl) * s.iq;
        CHECK(std::abs(res_q) <= 1e-12);
        CHECK(std::abs(res_d) <= 1e-12);
    }
}

TEST_CASE("stator_solve: analytic power derivative matches finite differences") {
    GeneratorParams p;
    const double h = 1e-6;
    for (double delta : {-M_PI / 2.0 - 0.5, -1.6, 0.7}) {
        const auto s = stator_solve(delta, p);
        const double fd = (stator_solve(delta + h, p).Pe - stator_solve(delta - h, p).Pe) / (2.0 * h);
        CHECK(s.Pe_ddelta == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("stator_solve: round-rotor lossless case collapses to the one-axis form") {
    GeneratorParams p;
    p.ra = 0.0;
    p.xd_p = 0.3;
    p.xq_p = 0.3;
    for (double delta : {-1.8, -0.4, 1.1}) {
        const auto s = stator_solve(delta, p);
        const double expect = (p.eq_p * s.vd - p.ed_p * s.vq) / (p.xd_p - p.xl);
        CHECK(s.Pe == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("stator_solve: degenerate parameters are rejected") {
    GeneratorParams p;
    p.ra = 0.0;
    p.xd_p = p.xl; // zeroes the determinant
    CHECK_THROWS_AS(stator_solve(0.0, p), std::invalid_argument);
}

TEST_CASE("generator_rhs: synchronous speed freezes the angle") {
    GeneratorParams p;
    Vector x(2);
    x << -1.0, 1.0;
    CHECK(generator_rhs(0.0, x, p)[0] == 0.0);
}

TEST_CASE("generator_rhs: initial condition slip rate") {
    GeneratorParams p;
    Vector x(2);
    x << -M_PI / 2.0 - 0.5, 0.95;
    const double expect = 2.0 * M_PI * 60.0 * (-0.05);
    CHECK(generator_rhs(0.0, x, p)[0] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("generator_rhs: power balance pins the equilibrium angle") {
    GeneratorParams p;
    const double dstar = find_equilibrium_delta(p);
    CHECK(std::abs(stator_solve(dstar, p).Pe - p.Pm) < 1e-8);
    CHECK(dstar == doctest::Approx(-1.5721541931869545).epsilon(1e-9));

    Vector eq(2);
    eq << dstar, 1.0;
    CHECK(generator_rhs(0.0, eq, p).norm() < 1e-8);
}

TEST_CASE("generator_jacobians: fixed entries and the power-angle gain") {
    GeneratorParams p;
    const double dstar = find_equilibrium_delta(p);
    Vector x(2);
    x << dstar, 1.0;
    const auto j = generator_jacobians(0.0, x, p);

    CHECK(j.A(0, 0) == 0.0);
    CHECK(j.A(0, 1) == doctest::Approx(2.0 * M_PI * 60.0).epsilon(1e-12));
    CHECK(j.A(1, 1) == doctest::Approx(-100.0 / 13.0).epsilon(1e-12));
    CHECK(j.A(1, 0) == doctest::Approx(-34.00193284341935 / 13.0).epsilon(1e-9));
    CHECK(j.B_Pm[0] == 0.0);
    CHECK(j.B_Pm[1] == doctest::Approx(1.0 / 13.0).epsilon(1e-14));
}

TEST_CASE("generator_jacobians: match finite differences of the rhs") {
    GeneratorParams p;
    Vector x(2);
    x << -M_PI / 2.0 - 0.5, 0.95;
    const auto j = generator_jacobians(0.0, x, p);

    const double h = 1e-7;
    for (int col = 0; col < 2; ++col) {
        Vector hi = x, lo = x;
        hi[col] += h;
        lo[col] -= h;
        Vector fd = (generator_rhs(0.0, hi, p) - generator_rhs(0.0, lo, p)) / (2.0 * h);
        for (int row = 0; row < 2; ++row) {
            const double scale = std::max(1.0, std::abs(j.A(row, col)));
            CHECK(std::abs(j.A(row, col) - fd[row]) <= 1e-6 * scale);
        }
    }
}

TEST_CASE("governor_torque_input: droop arithmetic and exact saturation") {
    GovernorParams gp;
    CHECK(governor_torque_input(1.0, gp) == 1.0);
    CHECK(governor_torque_input(0.9, gp) == 1.2);  // raw order 6.0, ceiling binds
    CHECK(governor_torque_input(1.05, gp) == 0.3); // raw order -1.5, floor binds

    for (int i = 0; i <= 100; ++i) {
        const double omega = 0.8 + 0.4 * i / 100.0;
        const double tin = governor_torque_input(omega, gp);
        CHECK(tin >= gp.T_min);
        CHECK(tin <= gp.T_max);
    }
}

TEST_CASE("governor_rhs: analytic steady state is a fixed point") {
    GeneratorParams p;
    GovernorParams gp;
    const double dstar = find_equilibrium_delta(p);

    // With omega = omega_ref the torque order is T_order; chasing the lag
    // chain gives tg1 = 1, tg2 = 1, tg3 = 1 - T4/T5 and output power 1.
    Vector x(5);
    x << dstar, 1.0, 1.0, 1.0, 1.0 - gp.T4 / gp.T5;
    CHECK(governor_mechanical_power(x, gp) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(governor_rhs(0.0, x, gp, p).norm() < 1e-8);
}

TEST_CASE("nominal generator run converges to synchronous speed") {
    GeneratorParams p;
    OdeSystem sys{2, [&p](double t, const Vector& x, const Vector&) {
                      return generator_rhs(t, x, p);
                  }};
    Vector x0(2);
    x0 << -M_PI / 2.0 - 0.5, 0.95;
    auto traj = integrate(sys, x0, 0.0, 20.0, Vector());

    CHECK((traj.sample(20.0) - traj.sample(19.0)).norm() < 1e-6);
    CHECK(std::abs(traj.sample(20.0)[1] - 1.0) < 1e-6);
}

TEST_CASE("governed five-state model settles at the second-order equilibrium") {
    GeneratorParams p;
    GovernorParams gp;
    const double dstar = find_equilibrium_delta(p);

    OdeSystem sys{5, [&gp, &p](double t, const Vector& x, const Vector&) {
                      return governor_rhs(t, x, gp, p);
                  }};
    Vector x0(5);
    x0 << -M_PI / 2.0 - 0.5, 0.95, 1.0, 1.0, 1.0 - gp.T4 / gp.T5;
    auto traj = integrate(sys, x0, 0.0, 20.0, Vector());

    Vector x_end = traj.sample(20.0);
    CHECK(std::abs(x_end[0] - dstar) < 1e-4);
    CHECK(std::abs(x_end[1] - 1.0) < 1e-4);
}

TEST_CASE("resonant_frequency: lightly damped second-order peak") {
    const double w0 = 2.0, zeta = 0.05;
    Matrix a(2, 2);
    a << 0.0, 1.0, -w0 * w0, -2.0 * zeta * w0;
    Vector u(2);
    u << 0.0, 1.0;
    const double expect = w0 * std::sqrt(1.0 - 2.0 * zeta * zeta);
    const double got = resonant_frequency(a, u);
    CHECK(std::abs(got - expect) / expect < 0.005);
}

TEST_CASE("resonant_frequency: overdamped gain has no peak") {
    Matrix a = Matrix::Zero(2, 2);
    a(0, 0) = -1.0;
    a(1, 1) = -2.0;
    Vector u = Vector::Ones(2);
    CHECK_THROWS_AS(resonant_frequency(a, u), std::runtime_error);
}

TEST_CASE("resonant_frequency: generator peak sits near the oscillatory mode") {
    GeneratorParams p;
    const double dstar = find_equilibrium_delta(p);
    Vector x(2);
    x << dstar, 1.0;
    const auto j = generator_jacobians(0.0, x, p);

    const double got = resonant_frequency(j.A, j.B_Pm);
    const double mode_imag = 31.164722410854394; // imaginary part of the eigenvalue pair
    CHECK(std::abs(got - mode_imag) / mode_imag < 0.10);
    CHECK(got == doctest::Approx(30.92972446861837).epsilon(5e-3));
}

TEST_CASE("resonant_frequency: rejects unstable matrices") {
    Matrix a(2, 2);
    a << 0.0, 1.0, 0.0, 0.0;
    Vector u(2);
    u << 0.0, 1.0;
    CHECK_THROWS_AS(resonant_frequency(a, u), std::invalid_argument);
}

TEST_CASE("validate_params: field constraint diagnostics") {
    GeneratorParams p;
    CHECK_NOTHROW(validate_params(p));
    p.xd_p = 0.1; // below xl
    CHECK_THROWS_AS(validate_params(p), std::invalid_argument);

    GovernorParams gp;
    CHECK_NOTHROW(validate_params(gp));
    gp.T_min = 2.0;
    CHECK_THROWS_AS(validate_params(gp), std::invalid_argument);
}
