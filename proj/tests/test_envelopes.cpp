#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gapbound/envelopes.hpp"
#include "gapbound/linalg.hpp"
#include "gapbound/ode.hpp"
#include "gapbound/powermodels.hpp"

#include <cmath>

using namespace gapbound;

namespace {

// Strongly non-normal oscillatory test matrix (stable complex pair).
Matrix swing_matrix() {
    GeneratorParams p;
    Vector x(2);
    x << -1.5721541931869545, 1.0;
    return generator_jacobians(0.0, x, p).A;
}

std::vector<double> swing_dA_samples(const Grid& grid) {
    GeneratorParams p;
    OdeSystem sys{2, [p](double t, const Vector& x, const Vector&) {
                      return generator_rhs(t, x, p);
                  }};
    Vector x0(2);
    x0 << -M_PI / 2.0 - 0.5, 0.95;
    auto nominal = integrate(sys, x0, 0.0, grid.back(), Vector());

    Matrix a_inf = generator_jacobians(0.0, nominal.states.back(), p).A;
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Matrix a = generator_jacobians(grid[i], nominal.sample(grid[i]), p).A;
        out[i] = spectral_norm(Matrix(a - a_inf));
    }
    return out;
}

} // namespace

TEST_CASE("sample_expm_norm: scalar decay and the unit start") {
    Grid grid = make_grid(0.0, 3.0, 0.1);
    auto v = sample_expm_norm(-Matrix::Identity(2, 2), grid);
    REQUIRE(v.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(v[i] == doctest::Approx(std::exp(-grid[i])).epsilon(1e-12));
    }
    CHECK(v[0] == doctest::Approx(1.0).epsilon(1e-14));

    auto v_swing = sample_expm_norm(swing_matrix(), make_grid(0.0, 2.0, 0.01));
    CHECK(v_swing[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sample_expm_norm: oscillatory decay for a complex pair") {
    Grid grid = make_grid(0.0, 4.0, 0.01);
    auto v = sample_expm_norm(swing_matrix(), grid);

    bool has_local_rise = false;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        if (v[i + 1] > v[i]) {
            has_local_rise = true;
            break;
        }
    }
    CHECK(has_local_rise);                  // non-monotone (ringing)
    CHECK(v.back() < 1e-3 * v.front());     // decaying overall
}

TEST_CASE("fit_envelope: pure exponential samples") {
    Grid grid = make_grid(0.0, 4.0, 0.01);
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        v[i] = std::exp(-2.0 * grid[i]);
    }

    auto env = fit_envelope(v, grid);
    CHECK(env.k == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(env.S == 0.0);
    CHECK(env.C >= 1.0);
    CHECK(env.C <= 1.1);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(env.value(grid[i]) >= v[i]);
    }

    auto exact = fit_envelope(v, grid, 0.0);
    CHECK(exact.C == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("fit_envelope: oscillating decay recovers rate, frequency, depth") {
    Grid grid = make_grid(0.0, 30.0, 0.01);
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double s = grid[i];
        v[i] = std::exp(-0.2 * s) * (1.0 + 0.3 * std::sin(4.0 * s + 0.9));
    }

    auto env = fit_envelope(v, grid);
    CHECK(env.k == doctest::Approx(0.2).epsilon(0.1));
    CHECK(env.omega == doctest::Approx(4.0).epsilon(0.03));
    CHECK(env.S > 0.2);
    CHECK(env.S < 0.4);

    double worst_ratio = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(env.value(grid[i]) >= v[i]); // domination is exact, no tolerance
        worst_ratio = std::max(worst_ratio, env.value(grid[i]) / std::max(v[i], 1e-300));
    }
    CHECK(worst_ratio < 2.0); // and the envelope stays tight
}

TEST_CASE("fit_envelope: dominates the sampled matrix-exponential norm") {
    Grid grid = make_grid(0.0, 20.0, 0.01);
    auto v = sample_expm_norm(swing_matrix(), grid);
    auto env = fit_envelope(v, grid);

    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(env.value(grid[i]) >= v[i]);
    }
    CHECK(env.k > 1.0); // decays at a rate set by the true mode, not the certificate
}

TEST_CASE("fit_envelope: dominates the state-matrix drift samples") {
    Grid grid = make_grid(0.0, 20.0, 0.01);
    auto v = swing_dA_samples(grid);
    auto env = fit_envelope(v, grid);

    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(env.value(grid[i]) >= v[i]);
    }
    CHECK(env.value(0.0) >= v[0]);
}

TEST_CASE("fit_envelope: non-decaying samples are a fit failure") {
    Grid grid = make_grid(0.0, 5.0, 0.1);
    std::vector<double> flat(grid.size(), 1.0);
    CHECK_THROWS_AS(fit_envelope(flat, grid), std::runtime_error);

    std::vector<double> rising(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        rising[i] = std::exp(0.5 * grid[i]);
    }
    CHECK_THROWS_AS(fit_envelope(rising, grid), std::runtime_error);
}

TEST_CASE("fit_envelope: degenerate and invalid inputs") {
    Grid grid = make_grid(0.0, 2.0, 0.1);
    std::vector<double> zeros(grid.size(), 0.0);
    auto env = fit_envelope(zeros, grid);
    CHECK(env.zero);
    CHECK(env.value(0.7) == 0.0);

    std::vector<double> negative(grid.size(), 1.0);
    negative[3] = -0.1;
    CHECK_THROWS_AS(fit_envelope(negative, grid), std::invalid_argument);

    std::vector<double> short_v(grid.size() - 1, 1.0);
    CHECK_THROWS_AS(fit_envelope(short_v, grid), std::invalid_argument);
}

TEST_CASE("lemma3_envelope: normal matrices give tight certificates") {
    auto neg_id = lemma3_envelope(-Matrix::Identity(2, 2));
    CHECK(neg_id.spec.C == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(neg_id.spec.k == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(neg_id.loose);

    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = -1.0;
    d(1, 1) = -2.0;
    auto diag = lemma3_envelope(d);
    CHECK(diag.spec.C == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(diag.spec.k == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(diag.loose);
}

TEST_CASE("lemma3_envelope: non-normal swing matrix is flagged loose") {
    auto env = lemma3_envelope(swing_matrix());
    CHECK(env.loose);
    CHECK(env.spec.C == doctest::Approx(12.008142).epsilon(1e-4));
    CHECK(env.spec.k > 0.0);
    CHECK(env.spec.k < 0.1); // certificate decays far slower than the true mode
}

TEST_CASE("fitted envelope carries far less area than the loose certificate") {
    Grid grid = make_grid(0.0, 20.0, 0.01);
    auto fitted = fit_envelope(sample_expm_norm(swing_matrix(), grid), grid);
    auto certified = lemma3_envelope(swing_matrix()).spec;
    CHECK(integrate_envelope(fitted, 20.0) < 0.1 * integrate_envelope(certified, 20.0));
}

TEST_CASE("integrate_envelope: closed forms") {
    EnvelopeSpec env;
    env.C = 1.0;
    env.k = 2.0;
    CHECK(integrate_envelope(env, 1.0) ==
          doctest::Approx((1.0 - std::exp(-2.0)) / 2.0).epsilon(1e-14));
    CHECK(integrate_envelope(env, 0.0) == 0.0);
    CHECK_THROWS_AS(integrate_envelope(env, -1.0), std::invalid_argument);
    CHECK(integrate_envelope(EnvelopeSpec::zero_envelope(), 5.0) == 0.0);
}

TEST_CASE("integrate_envelope: sinusoidal part against a fine quadrature") {
    EnvelopeSpec env;
    env.C = 1.3;
    env.k = 0.7;
    env.S = 0.4;
    env.omega = 5.0;
    env.phi = 0.3;

    const double t = 3.0;
    const int m = 300000;
    double acc = 0.0;
    double prev = env.value(0.0);
    for (int j = 1; j <= m; ++j) {
        const double s = t * j / m;
        const double cur = env.value(s);
        acc += 0.5 * (prev + cur) * (t / m);
        prev = cur;
    }
    CHECK(integrate_envelope(env, t) == doctest::Approx(acc).epsilon(1e-8));
}

TEST_CASE("integrate_envelope: loosening C loosens the integral") {
    EnvelopeSpec env;
    env.C = 2.0;
    env.k = 1.1;
    env.S = 0.2;
    env.omega = 3.0;
    env.phi = -0.4;
    EnvelopeSpec wider = env;
    wider.C = 2.5;
    CHECK(integrate_envelope(wider, 4.0) > integrate_envelope(env, 4.0));
}

TEST_CASE("integrate_envelope_product: unit exponential convolution") {
    EnvelopeSpec unit;
    unit.C = 1.0;
    unit.k = 1.0;
    CHECK(integrate_envelope_product(unit, unit, 1.0) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
    CHECK(integrate_envelope_product(unit, unit, 0.0) == 0.0);
    CHECK(integrate_envelope_product(unit, EnvelopeSpec::zero_envelope(), 2.0) == 0.0);
}

TEST_CASE("integrate_envelope_product: tenfold refinement agrees on smooth envelopes") {
    EnvelopeSpec slow_exp;
    slow_exp.C = 1.3;
    slow_exp.k = 0.7;
    slow_exp.S = 0.4;
    slow_exp.omega = 2.0;
    slow_exp.phi = 0.3;
    EnvelopeSpec slow_dA;
    slow_dA.C = 1.0;
    slow_dA.k = 1.0;
    slow_dA.S = 0.3;
    slow_dA.omega = 1.5;
    slow_dA.phi = -0.2;

    for (double t : {1.0, 5.0, 20.0}) {
        const double coarse = integrate_envelope_product(slow_exp, slow_dA, t, 0.001);
        const double fine = integrate_envelope_product(slow_exp, slow_dA, t, 0.0001);
        CHECK(std::abs(coarse - fine) <= 1e-6 * std::abs(fine));
    }
}

TEST_CASE("integrate_envelope_product: second-order refinement on fitted envelopes") {
    // The fitted generator envelopes ring near 62 rad/s, so the default step
    // leaves a few-1e-4 relative quadrature error; what must hold is clean
    // second-order shrinkage under refinement.
    Grid grid = make_grid(0.0, 20.0, 0.01);
    auto env_exp = fit_envelope(sample_expm_norm(swing_matrix(), grid), grid);
    auto env_dA = fit_envelope(swing_dA_samples(grid), grid);

    const double t = 1.5;
    const double i0 = integrate_envelope_product(env_exp, env_dA, t, 0.005);
    const double i1 = integrate_envelope_product(env_exp, env_dA, t, 0.0005);
    const double i2 = integrate_envelope_product(env_exp, env_dA, t, 0.00005);

    const double step_one = std::abs(i0 - i1);
    const double step_two = std::abs(i1 - i2);
    CHECK(step_one <= 1e-3 * std::abs(i1));  // coarse value already close
    CHECK(step_one >= 50.0 * step_two);      // and the error is O(h^2)
}
