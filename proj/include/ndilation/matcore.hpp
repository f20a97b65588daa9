#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "ndilation/errors.hpp"
#include "ndilation/types.hpp"

namespace ndil {

struct HermEig {
    RealVector values;      ///< ascending
    ComplexMatrix vectors;  ///< unitary, columns are eigenvectors
};

/// Eigendecomposition of a Hermitian matrix. The input is symmetrized as
/// (H + H*)/2 before the solve; inputs whose asymmetry exceeds
/// tol * (1 + max|entry|) are rejected.
inline HermEig herm_eig(const ComplexMatrix& h, double tol = kTol.hermitian_gate) {
    if (h.rows() != h.cols())
        throw ShapeMismatch("herm_eig: matrix is " + std::to_string(h.rows()) + "x" +
                            std::to_string(h.cols()));
    const double asym = max_abs(h - h.adjoint());
    if (asym > tol * (1.0 + max_abs(h)))
        throw NonHermitian("herm_eig: asymmetry " + std::to_string(asym) + " exceeds tolerance");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitize(h));
    if (solver.info() != Eigen::Success)
        throw ConvergenceFailure("herm_eig: eigensolver did not converge");
    return HermEig{solver.eigenvalues(), solver.eigenvectors()};
}

/// Largest singular value.
inline double op_norm(const ComplexMatrix& x) {
    if (x.size() == 0) return 0.0;
    if (x.rows() == 1 && x.cols() == 1) return std::abs(x(0, 0));
    Eigen::JacobiSVD<ComplexMatrix> svd(x);
    return svd.singularValues()(0);
}

/// Principal square root of a PSD matrix. Eigenvalues in [-floor_tol, 0) are
/// treated as round-off and clipped; anything below -floor_tol is a modeling
/// error and rejected.
inline ComplexMatrix psd_sqrt(const ComplexMatrix& p, double floor_tol = kTol.psd_floor) {
    HermEig eig = herm_eig(p);
    RealVector roots(eig.values.size());
    for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
        const double lambda = eig.values(i);
        if (lambda < -floor_tol)
            throw NotPSD("psd_sqrt: eigenvalue " + std::to_string(lambda) + " below -" +
                         std::to_string(floor_tol));
        roots(i) = std::sqrt(std::max(lambda, 0.0));
    }
    return eig.vectors * roots.asDiagonal() * eig.vectors.adjoint();
}

namespace detail {

/// Frobenius-nearest PSD matrix to an arbitrary complex matrix: Hermitian
/// part, then eigenvalue clipping. No Hermitian gate; used by iterative
/// solvers whose intermediate iterates are honestly non-Hermitian.
inline ComplexMatrix psd_clip(const ComplexMatrix& x) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitize(x));
    if (solver.info() != Eigen::Success)
        throw ConvergenceFailure("psd_clip: eigensolver did not converge");
    RealVector clipped = solver.eigenvalues().cwiseMax(0.0);
    return solver.eigenvectors() * clipped.asDiagonal() * solver.eigenvectors().adjoint();
}

} // namespace detail

/// Frobenius-nearest PSD matrix to a Hermitian input: V diag(max(lambda,0)) V*.
inline ComplexMatrix project_psd(const ComplexMatrix& h, double tol = kTol.hermitian_gate) {
    HermEig eig = herm_eig(h, tol);
    RealVector clipped = eig.values.cwiseMax(0.0);
    return eig.vectors * clipped.asDiagonal() * eig.vectors.adjoint();
}

/// Frobenius-nearest point of the spectral-norm ball of radius t: singular
/// values clipped at t.
inline ComplexMatrix clip_spectral(const ComplexMatrix& x, double t) {
    if (t < 0.0) throw Error("clip_spectral: radius must be non-negative");
    if (x.size() == 0) return x;
    Eigen::JacobiSVD<ComplexMatrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.singularValues()(0) <= t) return x;
    RealVector clipped = svd.singularValues().cwiseMin(t);
    return svd.matrixU() * clipped.asDiagonal() * svd.matrixV().adjoint();
}

} // namespace ndil
