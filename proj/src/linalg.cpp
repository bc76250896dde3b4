#include "gapbound/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <stdexcept>

namespace gapbound {

double spectral_norm(const Matrix& m)
{
    if (!m.allFinite())
        throw std::domain_error("spectral_norm: non-finite entries");
    if (m.size() == 0)
        return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

Spectrum eigenvalues(const Matrix& m)
{
    if (m.rows() != m.cols())
        throw std::invalid_argument("eigenvalues: matrix must be square");
    Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
    Spectrum out(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        out[i] = es.eigenvalues()(i);
    return out;
}

bool is_hurwitz(const Matrix& m, double margin)
{
    for (const auto& ev : eigenvalues(m))
        if (ev.real() >= -margin)
            return false;
    return true;
}

Matrix expm(const Matrix& m)
{
    if (m.rows() != m.cols())
        throw std::invalid_argument("expm: matrix must be square");
    if (!m.allFinite())
        throw std::domain_error("expm: non-finite entries");
    Matrix r = m.exp();
    if (!r.allFinite())
        throw std::runtime_error("expm: overflow");
    return r;
}

LyapunovEnvelope solve_lyapunov(const Matrix& a)
{
    if (a.rows() != a.cols())
        throw std::invalid_argument("solve_lyapunov: matrix must be square");
    if (!is_hurwitz(a))
        throw std::invalid_argument("solve_lyapunov: matrix is not Hurwitz");

    const Eigen::Index n = a.rows();
    // Vectorize A^T H + H A = -I column-wise:
    // vec(A^T H) = (I (x) A^T) vec(H), vec(H A) = (A^T (x) I) vec(H).
    Matrix K = Matrix::Zero(n * n, n * n);
    for (Eigen::Index j = 0; j < n; ++j)
        K.block(j * n, j * n, n, n) += a.transpose();
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            K.block(j * n, i * n, n, n) += a(i, j) * Matrix::Identity(n, n);

    Vector rhs = Vector::Zero(n * n);
    for (Eigen::Index i = 0; i < n; ++i)
        rhs(i * n + i) = -1.0;

    Vector h = K.fullPivLu().solve(rhs);
    Matrix H(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        H.col(j) = h.segment(j * n, n);
    H = 0.5 * (H + H.transpose().eval());

    Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    if (lmin <= 0.0)
        throw std::runtime_error("solve_lyapunov: solution not positive definite");

    LyapunovEnvelope env;
    env.H = H;
    env.beta = std::sqrt(lmax / lmin);
    env.c = 1.0 / (2.0 * lmax);
    return env;
}

} // namespace gapbound
