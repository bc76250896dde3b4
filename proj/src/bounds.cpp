#include "gapbound/bounds.hpp"

#include "gapbound/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace gapbound {

namespace {

void check_span_grid(const Grid& grid, double span_lo, double span_hi) {
    if (grid.empty()) {
        throw std::invalid_argument("bounds: evaluation grid is empty");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw std::invalid_argument("bounds: evaluation grid must increase strictly");
        }
    }
    const double pad = 1e-9 * std::max(1.0, std::abs(span_hi));
    if (grid.front() < span_lo - pad || grid.back() > span_hi + pad) {
        throw std::invalid_argument("bounds: evaluation grid leaves the system horizon");
    }
}

void check_traj(const LTVSystem& sys, const Trajectory& zlti, const Grid& grid) {
    check_span_grid(grid, sys.t0, sys.t_end);
    if (zlti.dimension != sys.dimension) {
        throw std::invalid_argument("bounds: trajectory dimension does not match the system");
    }
    const double pad = 1e-9 * std::max(1.0, std::abs(zlti.t_end()));
    if (grid.front() < zlti.t0() - pad || grid.back() > zlti.t_end() + pad) {
        throw std::invalid_argument("bounds: evaluation grid leaves the trajectory span");
    }
}

void check_g(const std::vector<double>& g, const Grid& grid) {
    if (g.size() != grid.size()) {
        throw std::invalid_argument("bounds: g samples and grid differ in length");
    }
    for (double v : g) {
        if (!std::isfinite(v) || v < 0.0) {
            throw std::invalid_argument("bounds: g samples must be finite and nonnegative");
        }
    }
}

std::vector<double> elapsed_times(const LTVSystem& sys, const Grid& grid) {
    std::vector<double> el(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        el[i] = std::max(0.0, grid[i] - sys.t0);
    }
    return el;
}

void fill_symmetric(BoundResult& out, int dimension, std::size_t i, double r) {
    out.radius[i] = r;
    out.lower[i] = Vector::Constant(dimension, -r);
    out.upper[i] = Vector::Constant(dimension, r);
}

} // namespace

Trajectory z_lti(const LTVSystem& sys, const IntegratorOptions& ctrl) {
    const Matrix a = sys.A_inf;
    auto frozen = [a](double) { return a; };
    return integrate_ltv(frozen, sys.u_of_t, sys.dimension, sys.t0, sys.t_end, ctrl);
}

std::vector<double> g_of_t(const LTVSystem& sys, const Trajectory& zlti,
                           const EnvelopeSpec& env_exp, const EnvelopeSpec& env_dA,
                           const Grid& grid, double quad_step) {
    check_traj(sys, zlti, grid);
    const double t0 = sys.t0;
    auto weight = [&zlti, t0](double s) { return zlti.sample(t0 + s).norm(); };
    return conv_table(env_exp, env_dA, elapsed_times(sys, grid), quad_step, weight).totals;
}

BoundResult bound1(const LTVSystem& sys, const Trajectory& zlti, const std::vector<double>& g,
                   const EnvelopeSpec& env_exp, const EnvelopeSpec& env_dA, const Grid& grid,
                   double quad_step) {
    check_traj(sys, zlti, grid);
    check_g(g, grid);
    const ConvTable tab = conv_table(env_exp, env_dA, elapsed_times(sys, grid), quad_step);
    BoundResult out;
    out.kind = BoundKind::bound1;
    out.times = grid;
    out.center.resize(grid.size());
    out.lower.resize(grid.size());
    out.upper.resize(grid.size());
    out.radius.resize(grid.size());
    double run = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        run = std::max(run, g[i]);
        const double r = g[i] + run * std::expm1(tab.totals[i]);
        const Vector c = zlti.sample(grid[i]);
        out.center[i] = c;
        out.radius[i] = r;
        out.lower[i] = c.array() - r;
        out.upper[i] = c.array() + r;
    }
    return out;
}

BoundResult bound1_tight(const LTVSystem& sys, const Trajectory& zlti, const std::vector<double>& g,
                         const EnvelopeSpec& env_exp, const EnvelopeSpec& env_dA, const Grid& grid,
                         const std::vector<double>& partition, double quad_step) {
    check_traj(sys, zlti, grid);
    check_g(g, grid);
    if (partition.size() < 2) {
        throw std::invalid_argument("bound1_tight: partition needs at least two edges");
    }
    for (std::size_t k = 1; k < partition.size(); ++k) {
        if (!(partition[k] > partition[k - 1])) {
            throw std::invalid_argument("bound1_tight: partition must increase strictly");
        }
    }
    const double pad = 1e-9 * std::max(1.0, std::abs(grid.back()));
    if (partition.front() > grid.front() + pad || partition.back() < grid.back() - pad) {
        throw std::invalid_argument("bound1_tight: partition must cover the evaluation span");
    }

    std::vector<double> edges(partition.size());
    for (std::size_t k = 0; k < partition.size(); ++k) {
        edges[k] = std::max(0.0, partition[k] - sys.t0);
    }
    const ConvTable tab = conv_table(env_exp, env_dA, elapsed_times(sys, grid), quad_step, {}, edges);

    // g linearly interpolated between grid nodes, exact on the nodes.
    auto g_at = [&grid, &g](double t) {
        if (t <= grid.front()) {
            return g.front();
        }
        if (t >= grid.back()) {
            return g.back();
        }
        const std::size_t j = std::upper_bound(grid.begin(), grid.end(), t) - grid.begin();
        const double w = (t - grid[j - 1]) / (grid[j] - grid[j - 1]);
        return g[j - 1] + w * (g[j] - g[j - 1]);
    };

    BoundResult out;
    out.kind = BoundKind::bound1_tight;
    out.times = grid;
    out.center.resize(grid.size());
    out.lower.resize(grid.size());
    out.upper.resize(grid.size());
    out.radius.resize(grid.size());
    const double tpad = 1e-12 * std::max(1.0, std::abs(grid.back()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid[i];
        const std::vector<double>& pref = tab.prefixes[i];
        double sum = 0.0;
        for (std::size_t k = 0; k + 1 < partition.size(); ++k) {
            if (!(partition[k] < t)) {
                break;
            }
            const double hi = std::min(partition[k + 1], t);
            // Piece max of g over the covered grid samples plus the
            // interpolated endpoints; every candidate is a past sample or a
            // convex mix of past samples, so the piece max never exceeds the
            // running max used by bound1.
            double m = std::max(g_at(std::max(partition[k], grid.front())), g_at(hi));
            const std::size_t first =
                std::lower_bound(grid.begin(), grid.end(), partition[k] - tpad) - grid.begin();
            const std::size_t last =
                std::upper_bound(grid.begin(), grid.end(), hi + tpad) - grid.begin();
            for (std::size_t j = first; j < last; ++j) {
                m = std::max(m, g[j]);
            }
            sum += m * (std::exp(-pref[k]) - std::exp(-pref[k + 1]));
        }
        const double r = g[i] + std::exp(tab.totals[i]) * sum;
        const Vector c = zlti.sample(t);
        out.center[i] = c;
        out.radius[i] = r;
        out.lower[i] = c.array() - r;
        out.upper[i] = c.array() + r;
    }
    return out;
}

BoundResult bound2(const LTVSystem& sys, const Trajectory& zlti, const EnvelopeSpec& env_exp,
                   const EnvelopeSpec& env_dA, const Grid& grid, double quad_step) {
    check_traj(sys, zlti, grid);
    const ConvTable tab = conv_table(env_exp, env_dA, elapsed_times(sys, grid), quad_step);
    BoundResult out;
    out.kind = BoundKind::bound2;
    out.times = grid;
    out.lower.resize(grid.size());
    out.upper.resize(grid.size());
    out.radius.resize(grid.size());
    double run = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double nz = zlti.sample(grid[i]).norm();
        run = std::max(run, nz);
        fill_symmetric(out, sys.dimension, i, nz + run * std::expm1(tab.totals[i]));
    }
    return out;
}

BoundResult theorem2_bound(const LTVSystem& sys, double M_u, double K2inf,
                           const EnvelopeSpec& env_exp, const EnvelopeSpec& env_dA,
                           const Grid& grid, double quad_step) {
    check_span_grid(grid, sys.t0, sys.t_end);
    if (!std::isfinite(M_u) || M_u < 0.0) {
        throw std::invalid_argument("theorem2_bound: M_u must be finite and nonnegative");
    }
    double k2 = K2inf;
    if (k2 == 0.0) {
        k2 = std::sqrt(static_cast<double>(sys.dimension));
    }
    if (!std::isfinite(k2) || k2 < 1.0) {
        throw std::invalid_argument("theorem2_bound: K2inf must be at least 1 (or 0 for the default)");
    }
    const std::vector<double> el = elapsed_times(sys, grid);
    const ConvTable tab = conv_table(env_exp, env_dA, el, quad_step);
    BoundResult out;
    out.kind = BoundKind::theorem2;
    out.times = grid;
    out.lower.resize(grid.size());
    out.upper.resize(grid.size());
    out.radius.resize(grid.size());
    double run = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double a = integrate_envelope(env_exp, el[i]);
        run = std::max(run, a);
        fill_symmetric(out, sys.dimension, i, k2 * M_u * (a + run * std::expm1(tab.totals[i])));
    }
    return out;
}

ConvergenceReport corollary_convergence(const Trajectory& z, const Trajectory& zlti,
                                        double tail_fraction) {
    if (!(tail_fraction > 0.0) || tail_fraction > 1.0) {
        throw std::invalid_argument("corollary_convergence: tail_fraction must lie in (0, 1]");
    }
    if (z.dimension != zlti.dimension) {
        throw std::invalid_argument("corollary_convergence: trajectory dimensions differ");
    }
    const double lo = std::max(z.t0(), zlti.t0());
    const double hi = std::min(z.t_end(), zlti.t_end());
    if (!(hi > lo)) {
        throw std::invalid_argument("corollary_convergence: trajectories share no span");
    }
    const int samples = 2000;
    const double tail_start = hi - tail_fraction * (hi - lo);
    ConvergenceReport rep;
    for (int j = 0; j <= samples; ++j) {
        const double t = (j == samples) ? hi : lo + (hi - lo) * j / samples;
        const double d = (z.sample(t) - zlti.sample(t)).norm();
        rep.peak = std::max(rep.peak, d);
        if (t >= tail_start - 1e-12 * std::max(1.0, std::abs(hi))) {
            rep.tail = std::max(rep.tail, d);
        }
    }
    rep.ratio = rep.peak > 0.0 ? rep.tail / rep.peak : 0.0;
    return rep;
}

bool gronwall_check(GronwallCheck& data) {
    const std::size_t n = data.grid.size();
    if (n == 0 || data.alpha.size() != n || data.beta.size() != n || data.gamma.size() != n) {
        throw std::invalid_argument("gronwall_check: grid/alpha/beta/gamma sizes must agree");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(data.grid[i] > data.grid[i - 1])) {
            throw std::invalid_argument("gronwall_check: grid must increase strictly");
        }
    }
    for (double b : data.beta) {
        if (!(b >= 0.0)) {
            throw std::invalid_argument("gronwall_check: beta samples must be nonnegative");
        }
    }
    data.rhs.assign(n, 0.0);
    data.rhs[0] = data.alpha[0];
    bool ok = true;
    double conv = 0.0; // integral of alpha*beta*e^{integral of beta}, advanced in scaled form
    double hyp_int = 0.0; // trapezoid integral of beta*gamma
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            const double h = data.grid[i] - data.grid[i - 1];
            const double eb = std::exp(0.5 * h * (data.beta[i] + data.beta[i - 1]));
            conv = eb * conv + 0.5 * h *
                                   (data.alpha[i] * data.beta[i] +
                                    data.alpha[i - 1] * data.beta[i - 1] * eb);
            hyp_int += 0.5 * h *
                       (data.beta[i] * data.gamma[i] + data.beta[i - 1] * data.gamma[i - 1]);
            data.rhs[i] = data.alpha[i] + conv;
        }
        const bool hypothesis = data.gamma[i] <= data.alpha[i] + hyp_int;
        if (hypothesis && !(data.gamma[i] <= data.rhs[i])) {
            ok = false;
        }
    }
    return ok;
}

BoundResult scale_to_gap(const BoundResult& b, double epsilon) {
    if (!std::isfinite(epsilon) || epsilon < 0.0) {
        throw std::invalid_argument("scale_to_gap: epsilon must be finite and nonnegative");
    }
    BoundResult out = b;
    out.scale = b.scale * epsilon;
    for (Vector& v : out.center) {
        v *= epsilon;
    }
    for (Vector& v : out.lower) {
        v *= epsilon;
    }
    for (Vector& v : out.upper) {
        v *= epsilon;
    }
    for (double& r : out.radius) {
        r *= epsilon;
    }
    return out;
}

} // namespace gapbound
