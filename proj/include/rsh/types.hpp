#pragma once

#include <Eigen/Dense>
#include <complex>

namespace rsh {

using Complex = std::complex<double>;
using Operator = Eigen::MatrixXcd;      // dense complex, column-major
using RealMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline double max_abs(const Operator& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double max_abs(const RealMatrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticity_defect(const Operator& m) {
    return max_abs(Operator(m - m.adjoint()));
}

inline bool is_hermitian(const Operator& m, double tol) {
    if (m.rows() != m.cols()) return false;
    double scale = std::max(1.0, max_abs(m));
    return hermiticity_defect(m) <= tol * scale;
}

inline Operator hermitize(const Operator& m) {
    return 0.5 * (m + m.adjoint());
}

// Largest absolute imaginary part; zero means the operator is real in the
// stored basis and the real eigensolver path applies.
inline double max_imag(const Operator& m) {
    return m.size() == 0 ? 0.0 : m.imag().cwiseAbs().maxCoeff();
}

}  // namespace rsh
