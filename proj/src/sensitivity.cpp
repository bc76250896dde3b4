#include "gapbound/sensitivity.hpp"

#include "gapbound/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace gapbound {

namespace {

void check_model(const ParametricModel& model) {
    if (model.dimension <= 0 || model.param_count < 0 || !model.rhs) {
        throw std::invalid_argument("sensitivity: model needs a positive dimension and an rhs");
    }
}

Matrix state_jacobian(const ParametricModel& model, double t, const Vector& x, const Vector& lambda) {
    return model.jac_x ? model.jac_x(t, x, lambda)
                       : jacobian_fd(model, t, x, lambda, JacobianTarget::state);
}

Matrix param_jacobian(const ParametricModel& model, double t, const Vector& x, const Vector& lambda) {
    return model.jac_lambda ? model.jac_lambda(t, x, lambda)
                            : jacobian_fd(model, t, x, lambda, JacobianTarget::param);
}

} // namespace

LTVSystem make_ltv_system(int dimension, std::function<Matrix(double)> A_of_t,
                          std::function<Vector(double)> u_of_t, Matrix A_inf, double t0,
                          double t_end, double steady_tol) {
    if (dimension <= 0 || !A_of_t || !(t_end > t0)) {
        throw std::invalid_argument("make_ltv_system: need dimension > 0, A_of_t, and t_end > t0");
    }
    if (A_inf.rows() != dimension || A_inf.cols() != dimension) {
        throw std::invalid_argument("make_ltv_system: A_inf dimension mismatch");
    }
    if (!is_hurwitz(A_inf)) {
        throw assumption_error("ltv system: limit matrix is not Hurwitz");
    }
    const double end_gap = spectral_norm(A_of_t(t_end) - A_inf);
    if (end_gap > steady_tol) {
        throw assumption_error("ltv system: A(t_end) is " + std::to_string(end_gap) +
                               " away from the limit matrix (tolerance " +
                               std::to_string(steady_tol) + ")");
    }
    if (t_end - t0 >= 1.0) {
        const double drift = spectral_norm(A_of_t(t_end) - A_of_t(t_end - 1.0));
        if (drift > steady_tol) {
            throw assumption_error("ltv system: A(t) still drifting at the end of the horizon (" +
                                   std::to_string(drift) + " over the last second)");
        }
    }

    LTVSystem sys;
    sys.dimension = dimension;
    sys.A_of_t = std::move(A_of_t);
    sys.u_of_t = u_of_t ? std::move(u_of_t) : [dimension](double) { return Vector::Zero(dimension); };
    sys.A_inf = std::move(A_inf);
    sys.t0 = t0;
    sys.t_end = t_end;
    sys.steady_tol = steady_tol;
    return sys;
}

Matrix jacobian_fd(const ParametricModel& model, double t, const Vector& x, const Vector& lambda,
                   JacobianTarget which) {
    check_model(model);
    const int rows = model.dimension;
    const int cols = (which == JacobianTarget::state) ? model.dimension
                                                      : static_cast<int>(lambda.size());
    Matrix j(rows, cols);
    for (int col = 0; col < cols; ++col) {
        Vector x_hi = x, x_lo = x, l_hi = lambda, l_lo = lambda;
        double base;
        if (which == JacobianTarget::state) {
            base = x[col];
        } else {
            base = lambda[col];
        }
        const double h = std::max(1e-6, 1e-6 * std::abs(base));
        if (which == JacobianTarget::state) {
            x_hi[col] = base + h;
            x_lo[col] = base - h;
        } else {
            l_hi[col] = base + h;
            l_lo[col] = base - h;
        }
        Vector f_hi = model.rhs(t, x_hi, l_hi);
        Vector f_lo = model.rhs(t, x_lo, l_lo);
        if (!f_hi.allFinite() || !f_lo.allFinite()) {
            throw std::domain_error("jacobian_fd: rhs returned non-finite values at a probe point");
        }
        j.col(col) = (f_hi - f_lo) / (2.0 * h);
    }
    return j;
}

LTVSystem build_param_sensitivity(const ParametricModel& model, const Trajectory& nominal,
                                  const Vector& lambda) {
    check_model(model);
    if (model.param_count != 1 || lambda.size() != 1) {
        throw std::invalid_argument("build_param_sensitivity: expects a single scalar parameter");
    }
    if (nominal.dimension != model.dimension) {
        throw std::invalid_argument("build_param_sensitivity: nominal trajectory dimension mismatch");
    }

    auto A_of_t = [model, nominal, lambda](double t) {
        return state_jacobian(model, t, nominal.sample(t), lambda);
    };
    auto u_of_t = [model, nominal, lambda](double t) {
        return Vector(param_jacobian(model, t, nominal.sample(t), lambda).col(0));
    };
    Matrix A_inf = state_jacobian(model, nominal.t_end(), nominal.states.back(), lambda);

    return make_ltv_system(model.dimension, std::move(A_of_t), std::move(u_of_t), std::move(A_inf),
                           nominal.t0(), nominal.t_end());
}

DisturbanceChannel build_bounded_disturbance_sensitivity(const ParametricModel& model,
                                                         const Trajectory& nominal,
                                                         const Vector& lambda) {
    check_model(model);
    if (nominal.dimension != model.dimension) {
        throw std::invalid_argument(
            "build_bounded_disturbance_sensitivity: nominal trajectory dimension mismatch");
    }

    auto A_of_t = [model, nominal, lambda](double t) {
        return state_jacobian(model, t, nominal.sample(t), lambda);
    };
    Matrix A_inf = state_jacobian(model, nominal.t_end(), nominal.states.back(), lambda);

    DisturbanceChannel ch;
    ch.sys = make_ltv_system(model.dimension, std::move(A_of_t), nullptr, std::move(A_inf),
                             nominal.t0(), nominal.t_end());

    // Worst-case per-entry forcing magnitude for a unit-sup-norm parameter
    // disturbance: the max absolute row sum of df/dlambda along the nominal.
    double m_u = 0.0;
    for (std::size_t i = 0; i < nominal.times.size(); ++i) {
        Matrix b = param_jacobian(model, nominal.times[i], nominal.states[i], lambda);
        m_u = std::max(m_u, b.cwiseAbs().rowwise().sum().maxCoeff());
    }
    ch.M_u = m_u;
    return ch;
}

Trajectory sensitivity_to_params(const LTVSystem& sys, const IntegratorOptions& ctrl) {
    return integrate_ltv(sys.A_of_t, sys.u_of_t, sys.dimension, sys.t0, sys.t_end, ctrl);
}

Trajectory sensitivity_to_x0(const ParametricModel& model, const Trajectory& nominal,
                             const Vector& lambda, const IntegratorOptions& ctrl) {
    check_model(model);
    const int n = model.dimension;

    OdeSystem stacked{n * n, [&model, &nominal, &lambda, n](double t, const Vector& z, const Vector&) {
                          Matrix a = state_jacobian(model, t, nominal.sample(t), lambda);
                          Vector dz(n * n);
                          for (int col = 0; col < n; ++col) {
                              dz.segment(col * n, n) = a * z.segment(col * n, n);
                          }
                          return dz;
                      }};

    Vector z0 = Vector::Zero(n * n);
    for (int i = 0; i < n; ++i) {
        z0[i * n + i] = 1.0;
    }
    return integrate(stacked, z0, nominal.t0(), nominal.t_end(), Vector(), ctrl);
}

Matrix sensitivity_matrix_at(const Trajectory& traj, int n, double t) {
    Vector z = traj.sample(t);
    if (z.size() != n * n) {
        throw std::invalid_argument("sensitivity_matrix_at: trajectory is not n^2-dimensional");
    }
    Matrix m(n, n);
    for (int col = 0; col < n; ++col) {
        m.col(col) = z.segment(col * n, n);
    }
    return m;
}

Trajectory sensitivity_to_t0(const ParametricModel& model, const Trajectory& nominal,
                             const Vector& lambda, const IntegratorOptions& ctrl) {
    check_model(model);
    const int n = model.dimension;

    OdeSystem homo{n, [&model, &nominal, &lambda](double t, const Vector& z, const Vector&) {
                       return Vector(state_jacobian(model, t, nominal.sample(t), lambda) * z);
                   }};
    Vector z0 = -model.rhs(nominal.t0(), nominal.states.front(), lambda);
    return integrate(homo, z0, nominal.t0(), nominal.t_end(), Vector(), ctrl);
}

} // namespace gapbound
