#pragma once

#include <string>
#include <utility>

#include "ndilation/errors.hpp"
#include "ndilation/matcore.hpp"
#include "ndilation/types.hpp"

namespace ndil {

/// Defect operators D_T = (I - T*T)^{1/2} and D_{T*} = (I - TT*)^{1/2}.
inline std::pair<ComplexMatrix, ComplexMatrix> defects(const ComplexMatrix& t,
                                                       double tol = kTol.contraction) {
    if (t.rows() != t.cols()) throw ShapeMismatch("defects: matrix must be square");
    const double norm = op_norm(t);
    if (norm > 1.0 + tol)
        throw NotContraction("defects: operator norm " + std::to_string(norm) + " exceeds 1");
    const ComplexMatrix id = ComplexMatrix::Identity(t.rows(), t.cols());
    // norm can exceed 1 by up to tol, so allow the matching eigenvalue slack
    const double floor_tol = std::max(kTol.psd_floor, 3.0 * tol);
    return {psd_sqrt(id - t.adjoint() * t, floor_tol), psd_sqrt(id - t * t.adjoint(), floor_tol)};
}

/// Unitary N-dilation of a single contraction, as an explicit block matrix on
/// (N+1)*n dimensions. The embedded copy of the original space is the first
/// block of coordinates.
struct EgervaryDilation {
    int N = 0;
    Eigen::Index block_dim = 0;
    ComplexMatrix U;

    Eigen::Index ambient_dim() const { return U.rows(); }

    /// Isometric inclusion of the original space as the first block.
    ComplexMatrix embedding() const {
        ComplexMatrix v = ComplexMatrix::Zero(ambient_dim(), block_dim);
        v.topLeftCorner(block_dim, block_dim) = ComplexMatrix::Identity(block_dim, block_dim);
        return v;
    }

    /// First-block compression of U^m.
    ComplexMatrix compression(int m) const {
        ComplexMatrix power = ComplexMatrix::Identity(ambient_dim(), ambient_dim());
        for (int i = 0; i < m; ++i) power = power * U;
        return power.topLeftCorner(block_dim, block_dim);
    }
};

/// Block layout, in (N+1) x (N+1) blocks of size n:
///
///     [ T                  D_{T*} ]
///     [ D_T                -T*    ]
///     [      I                    ]
///     [         ...               ]
///     [             I        0    ]
///
/// The (1,N) corner is -T*, the Halmos corner; it makes U unitary for every
/// contraction via the intertwining T D_T = D_{T*} T. The compression of U^m
/// onto the first block equals T^m for all m <= N.
inline EgervaryDilation egervary_dilation(const ComplexMatrix& t, int N,
                                          double tol = kTol.contraction) {
    if (N < 1) throw Error("egervary_dilation: N must be >= 1 (a 0-dilation is vacuous)");
    auto [d_t, d_tstar] = defects(t, tol);
    const Eigen::Index n = t.rows();

    EgervaryDilation dilation;
    dilation.N = N;
    dilation.block_dim = n;
    dilation.U = ComplexMatrix::Zero((N + 1) * n, (N + 1) * n);
    auto block = [&](int i, int j) { return dilation.U.block(i * n, j * n, n, n); };
    block(0, 0) = t;
    block(1, 0) = d_t;
    block(0, N) = d_tstar;
    block(1, N) = -t.adjoint();
    for (int i = 2; i <= N; ++i) block(i, i - 1) = ComplexMatrix::Identity(n, n);
    return dilation;
}

} // namespace ndil
