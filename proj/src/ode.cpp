#include "gapbound/ode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gapbound {

namespace {

// Dormand-Prince 4(5) tableau. The 5th-order weights double as the last
// stage (FSAL), so an accepted step costs six fresh rhs evaluations.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;

constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;

constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;

// 5th-order minus embedded 4th-order weights (error estimator).
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

void check_finite(const Vector& v, double t) {
    if (!v.allFinite()) {
        throw std::domain_error("ode: rhs returned non-finite values at t = " + std::to_string(t));
    }
}

} // namespace

Vector Trajectory::sample(double t) const {
    if (times.empty()) {
        throw std::out_of_range("trajectory: empty");
    }
    const double lo = times.front(), hi = times.back();
    const double pad = 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
    if (t < lo - pad || t > hi + pad) {
        throw std::out_of_range("trajectory: sample time " + std::to_string(t) +
                                " outside stored span [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + "]");
    }
    t = std::clamp(t, lo, hi);

    auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t i = (it == times.begin()) ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
    if (i >= times.size() - 1) {
        i = times.size() - 2;
    }
    if (times.size() == 1) {
        return states[0];
    }

    const double h = times[i + 1] - times[i];
    if (h <= 0.0) {
        return states[i];
    }
    const double s = (t - times[i]) / h;
    if (s <= 0.0) {
        return states[i];
    }
    if (s >= 1.0) {
        return states[i + 1];
    }

    // Cubic Hermite in the normalized coordinate.
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * states[i] + (h10 * h) * derivs[i] + h01 * states[i + 1] + (h11 * h) * derivs[i + 1];
}

Vector sample(const Trajectory& traj, double t) { return traj.sample(t); }

Trajectory integrate(const OdeSystem& sys, const Vector& x0, double t0, double t_end,
                     const Vector& params, const IntegratorOptions& ctrl) {
    if (sys.dimension <= 0 || x0.size() != sys.dimension) {
        throw std::invalid_argument("integrate: state size does not match system dimension");
    }
    if (!(t_end > t0)) {
        throw std::invalid_argument("integrate: need t_end > t0");
    }
    if (!(ctrl.abs_tol > 0.0) || !(ctrl.rel_tol > 0.0) || !(ctrl.max_step > 0.0)) {
        throw std::invalid_argument("integrate: tolerances and max_step must be positive");
    }

    const int n = sys.dimension;
    Trajectory out;
    out.dimension = n;

    double t = t0;
    Vector x = x0;
    Vector k1 = sys.rhs(t, x, params);
    check_finite(k1, t);

    out.times.push_back(t);
    out.states.push_back(x);
    out.derivs.push_back(k1);

    double h = std::min(ctrl.max_step, (t_end - t0) / 10.0);
    const double h_floor = 1e-14 * std::max(1.0, std::abs(t_end));

    Vector k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), x_new(n), err(n);

    while (t < t_end) {
        const double remaining = t_end - t;
        bool last = false;
        if (h >= remaining) {
            h = remaining;
            last = true;
        }
        if (h < h_floor && !last) {
            throw std::runtime_error("integrate: step size underflow near t = " + std::to_string(t));
        }

        k2 = sys.rhs(t + c2 * h, x + h * (a21 * k1), params);
        k3 = sys.rhs(t + c3 * h, x + h * (a31 * k1 + a32 * k2), params);
        k4 = sys.rhs(t + c4 * h, x + h * (a41 * k1 + a42 * k2 + a43 * k3), params);
        k5 = sys.rhs(t + c5 * h, x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), params);
        k6 = sys.rhs(t + h, x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), params);
        x_new = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        k7 = sys.rhs(t + h, x_new, params);
        check_finite(k7, t + h);

        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        // RMS of the error scaled by the per-component tolerance.
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double scale =
                ctrl.abs_tol + ctrl.rel_tol * std::max(std::abs(x[i]), std::abs(x_new[i]));
            const double r = err[i] / scale;
            acc += r * r;
        }
        const double err_norm = std::sqrt(acc / n);

        if (err_norm <= 1.0) {
            t = last ? t_end : t + h;
            x = x_new;
            k1 = k7; // first-same-as-last
            out.times.push_back(t);
            out.states.push_back(x);
            out.derivs.push_back(k1);
        }

        double factor = (err_norm > 0.0) ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
        factor = std::clamp(factor, 0.2, 5.0);
        h = std::min(factor * h, ctrl.max_step);
    }

    return out;
}

Trajectory integrate_fixed(const OdeSystem& sys, const Vector& x0, double t0, double t_end,
                           const Vector& params, double step) {
    if (sys.dimension <= 0 || x0.size() != sys.dimension) {
        throw std::invalid_argument("integrate_fixed: state size does not match system dimension");
    }
    if (!(t_end > t0) || !(step > 0.0)) {
        throw std::invalid_argument("integrate_fixed: need t_end > t0 and step > 0");
    }

    const auto steps = static_cast<std::size_t>(std::ceil((t_end - t0) / step - 1e-12));

    Trajectory out;
    out.dimension = sys.dimension;
    out.times.reserve(steps + 1);
    out.states.reserve(steps + 1);
    out.derivs.reserve(steps + 1);

    double t = t0;
    Vector x = x0;
    Vector k1 = sys.rhs(t, x, params);
    check_finite(k1, t);
    out.times.push_back(t);
    out.states.push_back(x);
    out.derivs.push_back(k1);

    for (std::size_t i = 0; i < steps; ++i) {
        const double t_next = (i + 1 == steps) ? t_end : t0 + (static_cast<double>(i) + 1.0) * step;
        const double h = t_next - t;
        const Vector k2 = sys.rhs(t + 0.5 * h, x + (0.5 * h) * k1, params);
        const Vector k3 = sys.rhs(t + 0.5 * h, x + (0.5 * h) * k2, params);
        const Vector k4 = sys.rhs(t + h, x + h * k3, params);
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = t_next;
        k1 = sys.rhs(t, x, params);
        check_finite(k1, t);
        out.times.push_back(t);
        out.states.push_back(x);
        out.derivs.push_back(k1);
    }

    return out;
}

Trajectory integrate_ltv(const std::function<Matrix(double)>& A_of_t,
                         const std::function<Vector(double)>& u_of_t,
                         int dimension, double t0, double t_end, const IntegratorOptions& ctrl) {
    if (dimension <= 0) {
        throw std::invalid_argument("integrate_ltv: dimension must be positive");
    }
    OdeSystem sys{dimension, [&A_of_t, &u_of_t](double t, const Vector& z, const Vector&) {
                      return Vector(A_of_t(t) * z + u_of_t(t));
                  }};
    return integrate(sys, Vector::Zero(dimension), t0, t_end, Vector(), ctrl);
}

} // namespace gapbound
