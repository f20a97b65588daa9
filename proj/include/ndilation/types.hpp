#pragma once

#include <complex>
#include <Eigen/Dense>

namespace ndil {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Central tolerance record. Every verification threshold in the library is
/// drawn from here (or overridden per call); downstream reports cite these
/// values, so they live in one place.
struct ToleranceConfig {
    double hermitian_gate = 1e-12; ///< admissible asymmetry for Hermitian inputs
    double psd_floor = 1e-10;      ///< eigenvalues below -psd_floor are modeling errors
    double contraction = 1e-10;    ///< op_norm(T) <= 1 + contraction
    double commute = 1e-10;        ///< admissible commutator norm
    double unitary = 1e-10;        ///< admissible deviation from U*U = I
    double povm_gate = 1e-8;       ///< residual a POVM must declare before dilation/reduction
    double atom_drop = 1e-14;      ///< trace floor below which an atom is discarded
};

inline constexpr ToleranceConfig kTol{};

inline bool entries_finite(const ComplexMatrix& m) {
    return m.allFinite();
}

/// Hermitian part (H + H*)/2. Exact Hermitian inputs are unchanged up to
/// round-off; near-Hermitian inputs lose their asymmetric noise.
inline ComplexMatrix hermitize(const ComplexMatrix& h) {
    return 0.5 * (h + h.adjoint());
}

inline double max_abs(const ComplexMatrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

} // namespace ndil
