#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace gapbound {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Spectrum = std::vector<std::complex<double>>;
using Grid = std::vector<double>;

/// Raised when input data violates a structural assumption the bound theory
/// needs (stability of the limit matrix, convergence of A(t), ...), as
/// opposed to a plain bad-argument error.
class assumption_error : public std::runtime_error {
public:
    explicit assumption_error(const std::string& what) : std::runtime_error(what) {}
};

/// Uniform grid from t0 to t_end inclusive with the given step; the last
/// point is clamped to t_end exactly.
inline Grid make_grid(double t0, double t_end, double step)
{
    Grid g;
    const int n = static_cast<int>(std::ceil((t_end - t0) / step - 1e-12));
    g.reserve(n + 1);
    for (int i = 0; i < n; ++i)
        g.push_back(t0 + i * step);
    g.push_back(t_end);
    return g;
}

} // namespace gapbound
