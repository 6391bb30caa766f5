#pragma once

#include <Eigen/Dense>
#include <complex>

namespace ionlink {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cxd kI{0.0, 1.0};

inline Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Symmetrize away round-off; inputs are Hermitian up to numerical noise.
inline Mat hermitize(const Mat& m) { return 0.5 * (m + m.adjoint()); }

inline double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

inline bool is_hermitian(const Mat& m, double tol) {
    return max_abs(m - m.adjoint()) <= tol;
}

// Column-major vectorization, so vec(A rho B) = (B^T (x) A) vec(rho).
inline Vec vectorize(const Mat& m) {
    return Eigen::Map<const Vec>(m.data(), m.size());
}

inline Mat unvectorize(const Vec& v, Eigen::Index dim) {
    return Eigen::Map<const Mat>(v.data(), dim, dim);
}

}  // namespace ionlink
