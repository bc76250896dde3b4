#include "gapbound/envelopes.hpp"

#include "gapbound/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace gapbound {

namespace {

constexpr double kGolden = 0.6180339887498949; // (sqrt(5) - 1) / 2

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n == 0) {
        return 0.0;
    }
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Least squares fit of rho ~ m + a sin(w s) + b cos(w s); returns the sum of
// squared residuals and the coefficients (m, a, b).
struct SineFit {
    double sse;
    double m, a, b;
};

SineFit sine_lsq(const std::vector<double>& s, const std::vector<double>& rho, double w) {
    const int n = static_cast<int>(s.size());
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = std::sin(w * s[i]);
        x(i, 2) = std::cos(w * s[i]);
        y[i] = rho[i];
    }
    Eigen::Vector3d cf = x.colPivHouseholderQr().solve(y);
    const double sse = (x * cf - y).squaredNorm();
    return {sse, cf[0], cf[1], cf[2]};
}

} // namespace

std::vector<double> sample_expm_norm(const Matrix& A_inf, const Grid& grid) {
    if (A_inf.rows() != A_inf.cols()) {
        throw std::invalid_argument("sample_expm_norm: matrix must be square");
    }
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out[i] = spectral_norm(expm(Matrix(A_inf * grid[i])));
    }
    return out;
}

EnvelopeSpec fit_envelope(const std::vector<double>& samples, const Grid& grid, double inflation) {
    const std::size_t n = samples.size();
    if (n < 2 || grid.size() != n) {
        throw std::invalid_argument("fit_envelope: need at least two samples on a matching grid");
    }
    if (inflation < 0.0) {
        throw std::invalid_argument("fit_envelope: inflation must be nonnegative");
    }
    double vmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(samples[i]) || samples[i] < 0.0) {
            throw std::invalid_argument("fit_envelope: samples must be finite and nonnegative");
        }
        if (i + 1 < n && !(grid[i + 1] > grid[i])) {
            throw std::invalid_argument("fit_envelope: grid must be strictly increasing");
        }
        vmax = std::max(vmax, samples[i]);
    }
    if (vmax == 0.0) {
        return EnvelopeSpec::zero_envelope();
    }

    // Informative subset: values above a relative floor. Stragglers far
    // below it would otherwise dominate the log fit.
    std::vector<double> si, vi, lv;
    for (std::size_t i = 0; i < n; ++i) {
        if (samples[i] >= vmax * 1e-8) {
            si.push_back(grid[i]);
            vi.push_back(samples[i]);
            lv.push_back(std::log(samples[i]));
        }
    }
    const int ni = static_cast<int>(si.size());

    // Interior local maxima (crests) of the informative subset.
    std::vector<int> crest;
    for (int j = 1; j + 1 < ni; ++j) {
        if (vi[j] >= vi[j - 1] && vi[j] >= vi[j + 1]) {
            crest.push_back(j);
        }
    }
    const bool oscillatory = crest.size() >= 4;

    // Decay rate: a log-linear fit through the tail half of the crest line
    // (the early crests carry the nonlinear swing, not the decay).
    double lnC, slope;
    {
        std::vector<int> pts;
        if (oscillatory) {
            const double smid = 0.5 * (si[crest.front()] + si[crest.back()]);
            for (int j : crest) {
                if (si[j] >= smid) {
                    pts.push_back(j);
                }
            }
            if (pts.size() < 2) {
                pts = crest;
            }
        } else {
            pts.resize(ni);
            for (int j = 0; j < ni; ++j) {
                pts[j] = j;
            }
        }
        Eigen::MatrixXd x(pts.size(), 2);
        Eigen::VectorXd y(pts.size());
        for (std::size_t r = 0; r < pts.size(); ++r) {
            x(r, 0) = 1.0;
            x(r, 1) = si[pts[r]];
            y[r] = lv[pts[r]];
        }
        Eigen::Vector2d cf = x.colPivHouseholderQr().solve(y);
        lnC = cf[0];
        slope = cf[1];
    }
    if (!(-slope > 0.0)) {
        throw std::runtime_error("fit_envelope: samples do not decay (fitted rate <= 0)");
    }
    double k = -slope;
    const double c0 = std::exp(lnC);

    double w0 = 0.0;
    if (oscillatory) {
        std::vector<double> spacing;
        for (std::size_t j = 1; j < crest.size(); ++j) {
            spacing.push_back(si[crest[j]] - si[crest[j - 1]]);
        }
        w0 = 2.0 * M_PI / median(spacing);
    }

    // Residual stage at a fixed decay rate: frequency lock, minimax
    // depth/phase, inflation, then the full-grid domination ratio.
    struct Stage2 {
        double C, S, w, phi, ratio;
    };
    auto stage2 = [&](double k_cur) -> Stage2 {
        std::vector<double> rho(ni);
        for (int j = 0; j < ni; ++j) {
            rho[j] = vi[j] / (c0 * std::exp(-k_cur * si[j]));
        }
        double s_depth = 0.0, w = 0.0, phi = 0.0;
        double lift = *std::max_element(rho.begin(), rho.end());

        if (oscillatory) {
            auto sse_of = [&](double w_try) { return sine_lsq(si, rho, w_try); };

            const int scan = 200;
            const double w_lo = 0.75 * w0, w_hi = 1.3 * w0;
            double best_w = w_lo, best_sse = std::numeric_limits<double>::infinity();
            for (int j = 0; j < scan; ++j) {
                const double w_try = w_lo + (w_hi - w_lo) * j / (scan - 1);
                const double sse = sse_of(w_try).sse;
                if (sse < best_sse) {
                    best_sse = sse;
                    best_w = w_try;
                }
            }
            const double dw = (w_hi - w_lo) / (scan - 1);
            double a = best_w - dw, b = best_w + dw;
            while (b - a > 1e-9 * w0) {
                const double c = b - kGolden * (b - a);
                const double d = a + kGolden * (b - a);
                if (sse_of(c).sse < sse_of(d).sse) {
                    b = d;
                } else {
                    a = c;
                }
            }
            w = 0.5 * (a + b);
            const auto fit = sse_of(w);
            const double phi0 = (std::hypot(fit.a, fit.b) > 0.0) ? std::atan2(fit.b, fit.a) : 0.0;

            auto lift_amp = [&](double s_try, double phi_try) {
                double worst = 0.0;
                for (int j = 0; j < ni; ++j) {
                    worst = std::max(worst,
                                     rho[j] / (1.0 + s_try * std::sin(w * si[j] + phi_try)));
                }
                return worst;
            };

            double best_lift = lift_amp(0.0, phi0), best_s = 0.0, best_phi = phi0;
            for (int pi = 0; pi < 41; ++pi) {
                const double phi_c = phi0 - 0.5 + pi * 0.025;
                double sa = 0.0, sb = 0.95;
                while (sb - sa > 1e-6) {
                    const double sc = sb - kGolden * (sb - sa);
                    const double sd = sa + kGolden * (sb - sa);
                    if (lift_amp(sc, phi_c) < lift_amp(sd, phi_c)) {
                        sb = sd;
                    } else {
                        sa = sc;
                    }
                }
                const double s_st = 0.5 * (sa + sb);
                const double la_c = lift_amp(s_st, phi_c);
                if (la_c < best_lift) {
                    best_lift = la_c;
                    best_s = s_st;
                    best_phi = phi_c;
                }
            }
            lift = best_lift;
            s_depth = best_s;
            phi = best_phi;
            if (s_depth < 0.01) { // oscillation too shallow to pay for
                s_depth = 0.0;
                w = 0.0;
                phi = 0.0;
                lift = *std::max_element(rho.begin(), rho.end());
            }
        }

        Stage2 out;
        out.C = c0 * lift * (1.0 + inflation);
        out.S = s_depth;
        out.w = w;
        out.phi = phi;
        double ratio = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double env = out.C * std::exp(-k_cur * grid[i]) *
                               (1.0 + out.S * std::sin(out.w * grid[i] + out.phi));
            ratio = std::max(ratio, samples[i] / std::max(env, 1e-300));
        }
        out.ratio = std::max(ratio, 1.0);
        return out;
    };

    Stage2 st{};
    for (int pass = 0; pass < 12; ++pass) {
        st = stage2(k);
        if (st.ratio <= 1.2) {
            break;
        }
        k *= 0.95; // tail steeper than the stragglers allow: relax the decay
    }
    if (st.ratio > 1.0) {
        st.C *= st.ratio * (1.0 + 1e-12);
    }

    EnvelopeSpec env;
    env.C = st.C;
    env.k = k;
    env.S = st.S;
    env.omega = st.w;
    env.phi = st.phi;
    for (std::size_t i = 0; i < n; ++i) {
        if (env.value(grid[i]) < samples[i]) {
            throw std::runtime_error("fit_envelope: domination lift failed (internal error)");
        }
    }
    return env;
}

Lemma3Envelope lemma3_envelope(const Matrix& A_inf) {
    const auto lyap = solve_lyapunov(A_inf);

    Lemma3Envelope out;
    out.spec.C = lyap.beta;
    out.spec.k = lyap.c;
    out.spec.S = 0.0;
    out.spec.omega = 0.0;
    out.spec.phi = 0.0;

    // Compare the certificate against the sampled norm curve over its own
    // decay span; a >10x overshoot anywhere marks it loose.
    const double span = 5.0 / lyap.c;
    const int steps = 500;
    for (int i = 0; i <= steps && !out.loose; ++i) {
        const double s = span * i / steps;
        const double actual = spectral_norm(expm(Matrix(A_inf * s)));
        if (actual >= 1e-280 && out.spec.value(s) > 10.0 * actual) {
            out.loose = true;
        }
    }
    return out;
}

double integrate_envelope(const EnvelopeSpec& env, double t) {
    if (t < 0.0) {
        throw std::invalid_argument("integrate_envelope: t must be nonnegative");
    }
    if (env.zero || t == 0.0) {
        return 0.0;
    }
    const double decay = env.C * (1.0 - std::exp(-env.k * t)) / env.k;
    if (env.S == 0.0) {
        return decay;
    }
    const double k = env.k, w = env.omega, phi = env.phi;
    const double denom = k * k + w * w;
    const double at0 = k * std::sin(phi) + w * std::cos(phi);
    const double att = std::exp(-k * t) * (k * std::sin(w * t + phi) + w * std::cos(w * t + phi));
    return decay + env.C * env.S * (at0 - att) / denom;
}

int quad_intervals(double t, double step) {
    if (step <= 0.0) {
        step = std::min(0.005, t / 2000.0);
    }
    if (step <= 0.0) {
        return 1;
    }
    return std::max(1, static_cast<int>(std::ceil(t / step - 1e-12)));
}

double integrate_envelope_product(const EnvelopeSpec& env_exp, const EnvelopeSpec& env_dA, double t,
                                  double quad_step) {
    if (t < 0.0) {
        throw std::invalid_argument("integrate_envelope_product: t must be nonnegative");
    }
    if (t == 0.0 || env_exp.zero || env_dA.zero) {
        return 0.0;
    }
    const int m = quad_intervals(t, quad_step);
    const double h = t / m;
    double acc = 0.0;
    double prev = env_exp.value(t) * env_dA.value(0.0);
    for (int j = 1; j <= m; ++j) {
        const double s = (j == m) ? t : j * h;
        const double cur = env_exp.value(t - s) * env_dA.value(s);
        acc += 0.5 * (prev + cur) * h;
        prev = cur;
    }
    return acc;
}

} // namespace gapbound
