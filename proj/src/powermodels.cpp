#include "gapbound/powermodels.hpp"

#include "gapbound/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace gapbound {

namespace {

void require(bool ok, const char* what) {
    if (!ok) {
        throw std::invalid_argument(what);
    }
}

} // namespace

void validate_params(const GeneratorParams& p) {
    require(p.M > 0.0, "generator params: M must be > 0");
    require(p.f > 0.0, "generator params: f must be > 0");
    require(p.Omega_b > 0.0, "generator params: Omega_b must be > 0");
    require(p.xd_p > 0.0, "generator params: xd_p must be > 0");
    require(p.xq_p > 0.0, "generator params: xq_p must be > 0");
    require(p.xl > 0.0, "generator params: xl must be > 0");
    require(p.V > 0.0, "generator params: V must be > 0");
    require(p.ra > 0.0, "generator params: ra must be > 0");
    require(p.Pm > 0.0, "generator params: Pm must be > 0");
    require(p.D > 0.0, "generator params: D must be > 0");
    require(p.xd_p > p.xl, "generator params: xd_p must exceed xl");
    require(p.xq_p > p.xl, "generator params: xq_p must exceed xl");
}

void validate_params(const GovernorParams& gp) {
    require(gp.T_min < gp.T_max, "governor params: T_min must be below T_max");
    require(gp.R > 0.0, "governor params: droop R must be > 0");
    require(gp.Ts > 0.0, "governor params: Ts must be > 0");
    require(gp.Tc > 0.0, "governor params: Tc must be > 0");
    require(gp.T5 > 0.0, "governor params: T5 must be > 0");
    require(gp.T3 >= 0.0, "governor params: T3 must be >= 0");
    require(gp.T4 >= 0.0, "governor params: T4 must be >= 0");
}

StatorSolution stator_solve(double delta, const GeneratorParams& p) {
    const double vd = p.V * std::cos(delta);
    const double vq = p.V * std::sin(delta);

    // [xd_p - xl   ra        ] [id]   [eq_p - vq]
    // [ra          -(xq_p-xl)] [iq] = [ed_p - vd]
    const double a11 = p.xd_p - p.xl;
    const double a12 = p.ra;
    const double a21 = p.ra;
    const double a22 = -(p.xq_p - p.xl);
    const double det = a11 * a22 - a12 * a21;
    if (std::abs(det) < 1e-14) {
        throw std::invalid_argument("stator_solve: degenerate stator parameters (singular 2x2 system)");
    }

    const double r1 = p.eq_p - vq;
    const double r2 = p.ed_p - vd;
    const double id = (r1 * a22 - a12 * r2) / det;
    const double iq = (a11 * r2 - r1 * a21) / det;

    // Angle derivatives flow through the terminal voltages only.
    const double dvd = -vq; // d(V cos)/ddelta
    const double dvq = vd;  // d(V sin)/ddelta
    const double dr1 = -dvq;
    const double dr2 = -dvd;
    const double did = (dr1 * a22 - a12 * dr2) / det;
    const double diq = (a11 * dr2 - dr1 * a21) / det;

    StatorSolution s;
    s.id = id;
    s.iq = iq;
    s.vd = vd;
    s.vq = vq;
    s.Pe = (vq + p.ra * iq) * iq + (vd + p.ra * id) * id;
    s.Qe = (vq + p.ra * iq) * id - (vd + p.ra * id) * iq;
    s.Pe_ddelta = (dvq + p.ra * diq) * iq + (vq + p.ra * iq) * diq +
                  (dvd + p.ra * did) * id + (vd + p.ra * id) * did;
    return s;
}

Vector generator_rhs(double /*t*/, const Vector& x, const GeneratorParams& p) {
    if (x.size() != 2) {
        throw std::invalid_argument("generator_rhs: state must be (delta, omega)");
    }
    const double delta = x[0];
    const double omega = x[1];
    const auto s = stator_solve(delta, p);

    Vector dx(2);
    dx[0] = p.Omega_b * (omega - 1.0);
    dx[1] = (p.Pm - s.Pe - p.D * (omega - 1.0)) / p.M;
    return dx;
}

GeneratorJacobians generator_jacobians(double /*t*/, const Vector& x, const GeneratorParams& p) {
    if (x.size() != 2) {
        throw std::invalid_argument("generator_jacobians: state must be (delta, omega)");
    }
    const auto s = stator_solve(x[0], p);

    GeneratorJacobians j;
    j.A = Matrix::Zero(2, 2);
    j.A(0, 1) = p.Omega_b;
    j.A(1, 0) = -s.Pe_ddelta / p.M;
    j.A(1, 1) = -p.D / p.M;
    j.B_Pm = Vector::Zero(2);
    j.B_Pm[1] = 1.0 / p.M;
    return j;
}

double governor_torque_input(double omega, const GovernorParams& gp) {
    const double unsat = gp.T_order + (gp.omega_ref - omega) / gp.R;
    return std::clamp(unsat, gp.T_min, gp.T_max);
}

double governor_mechanical_power(const Vector& x, const GovernorParams& gp) {
    if (x.size() != 5) {
        throw std::invalid_argument("governor_mechanical_power: state must be 5-dimensional");
    }
    const double tg1 = x[2], tg2 = x[3], tg3 = x[4];
    return tg3 + (gp.T4 / gp.T5) * (tg2 + (gp.T3 / gp.Tc) * tg1);
}

Vector governor_rhs(double /*t*/, const Vector& x, const GovernorParams& gp,
                    const GeneratorParams& p) {
    if (x.size() != 5) {
        throw std::invalid_argument("governor_rhs: state must be (delta, omega, tg1, tg2, tg3)");
    }
    const double delta = x[0], omega = x[1];
    const double tg1 = x[2], tg2 = x[3], tg3 = x[4];

    const double T_in = governor_torque_input(omega, gp);
    const double Pm = governor_mechanical_power(x, gp);
    const auto s = stator_solve(delta, p);

    Vector dx(5);
    dx[0] = p.Omega_b * (omega - 1.0);
    dx[1] = (Pm - s.Pe - p.D * (omega - 1.0)) / p.M;
    dx[2] = (T_in - tg1) / gp.Ts;
    dx[3] = ((1.0 - gp.T3 / gp.Tc) * tg1 - tg2) / gp.Tc;
    dx[4] = ((1.0 - gp.T4 / gp.T5) * (tg2 + (gp.T3 / gp.Tc) * tg1) - tg3) / gp.T5;
    return dx;
}

namespace {

double frequency_gain(const Matrix& a, const Vector& u, double w) {
    const int n = static_cast<int>(a.rows());
    Eigen::MatrixXcd shifted = -a.cast<std::complex<double>>();
    for (int i = 0; i < n; ++i) {
        shifted(i, i) += std::complex<double>(0.0, w);
    }
    Eigen::VectorXcd response = shifted.fullPivLu().solve(u.cast<std::complex<double>>().eval());
    return response.norm();
}

} // namespace

double resonant_frequency(const Matrix& A_inf, const Vector& input_dir, const ResonanceSweep& sweep) {
    if (A_inf.rows() != A_inf.cols() || A_inf.rows() != input_dir.size()) {
        throw std::invalid_argument("resonant_frequency: matrix/input dimension mismatch");
    }
    if (!(sweep.w_min > 0.0) || !(sweep.w_max > sweep.w_min) || sweep.steps < 3) {
        throw std::invalid_argument("resonant_frequency: sweep must satisfy 0 < w_min < w_max, steps >= 3");
    }
    if (!is_hurwitz(A_inf)) {
        throw std::invalid_argument("resonant_frequency: matrix must be Hurwitz");
    }

    const double ratio = sweep.w_max / sweep.w_min;
    std::vector<double> w(sweep.steps), gain(sweep.steps);
    for (int i = 0; i < sweep.steps; ++i) {
        w[i] = sweep.w_min * std::pow(ratio, static_cast<double>(i) / (sweep.steps - 1));
        gain[i] = frequency_gain(A_inf, input_dir, w[i]);
    }

    int peak = 0;
    for (int i = 1; i < sweep.steps; ++i) {
        if (gain[i] > gain[peak]) {
            peak = i;
        }
    }
    if (peak == 0 || peak == sweep.steps - 1) {
        throw std::runtime_error("resonant_frequency: swept gain has no interior peak "
                                 "(monotone over the sweep range)");
    }

    // Golden-section refinement of the bracketing triple.
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = w[peak - 1], b = w[peak + 1];
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = frequency_gain(A_inf, input_dir, x1);
    double f2 = frequency_gain(A_inf, input_dir, x2);
    while (b - a > 1e-4 * (0.5 * (a + b))) {
        if (f1 > f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = frequency_gain(A_inf, input_dir, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = frequency_gain(A_inf, input_dir, x2);
        }
    }
    return 0.5 * (a + b);
}

} // namespace gapbound
