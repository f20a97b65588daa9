#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "ndilation/errors.hpp"
#include "ndilation/matcore.hpp"
#include "ndilation/multi_index.hpp"
#include "ndilation/tuples.hpp"
#include "ndilation/types.hpp"

namespace ndil {

/// One atom of a matrix-valued measure on the k-torus: a point with
/// unit-modulus coordinates and a PSD matrix weight.
struct TorusAtom {
    ComplexVector point;
    ComplexMatrix weight;
};

/// Finitely supported matrix measure on the k-torus whose moments match a
/// tuple's symbols over an index set, up to the declared residual. The
/// weights form a POVM: each is PSD and they sum to the identity.
struct AtomicPOVM {
    int k = 0;
    Eigen::Index n = 0;
    std::vector<TorusAtom> atoms;
    MultiIndexSet index_set;
    double residual = 0.0;
};

/// The full product grid of per_axis-th roots of unity on the k-torus.
struct TorusGrid {
    int k = 1;
    int per_axis = 64;

    std::size_t size() const {
        std::size_t total = 1;
        for (int j = 0; j < k; ++j) total *= static_cast<std::size_t>(per_axis);
        return total;
    }

    ComplexVector point(std::size_t index) const {
        ComplexVector w(k);
        for (int j = 0; j < k; ++j) {
            const std::size_t digit = index % static_cast<std::size_t>(per_axis);
            index /= static_cast<std::size_t>(per_axis);
            const double angle = 2.0 * std::numbers::pi * static_cast<double>(digit) /
                                 static_cast<double>(per_axis);
            w(j) = Complex(std::cos(angle), std::sin(angle));
        }
        return w;
    }
};

/// w^n for a torus point, negative exponents through conjugation.
inline Complex point_power(const ComplexVector& point, const std::vector<int>& n) {
    Complex result(1.0, 0.0);
    for (Eigen::Index j = 0; j < point.size(); ++j) {
        const Complex base = n[j] >= 0 ? point(j) : std::conj(point(j));
        for (int m = 0; m < std::abs(n[j]); ++m) result *= base;
    }
    return result;
}

inline std::vector<ComplexMatrix> tuple_symbols(const ContractionTuple& tuple,
                                                const MultiIndexSet& index_set) {
    std::vector<ComplexMatrix> targets;
    targets.reserve(index_set.size());
    for (const auto& n : index_set.indices) targets.push_back(symbol(tuple, n));
    return targets;
}

inline ComplexMatrix povm_moment(const AtomicPOVM& povm, const std::vector<int>& n) {
    ComplexMatrix acc = ComplexMatrix::Zero(povm.n, povm.n);
    for (const TorusAtom& atom : povm.atoms) acc += point_power(atom.point, n) * atom.weight;
    return acc;
}

/// Self-audit: largest deviation between the measure's moments and the given
/// targets, in operator norm, over the measure's own index set.
inline double moment_residual(const AtomicPOVM& povm, const std::vector<ComplexMatrix>& targets) {
    double worst = 0.0;
    for (std::size_t r = 0; r < povm.index_set.size(); ++r)
        worst = std::max(worst, op_norm(povm_moment(povm, povm.index_set.indices[r]) - targets[r]));
    return worst;
}

/// Scalar Poisson kernel of the disc: (1 - |z|^2) / |1 - z conj(w)|^2.
inline double poisson_scalar(Complex z, Complex w) {
    if (std::abs(z) >= 1.0)
        throw OutOfDisc("poisson_scalar: |z| = " + std::to_string(std::abs(z)));
    const Complex denom = 1.0 - z * std::conj(w);
    return (1.0 - std::norm(z)) / std::norm(denom);
}

namespace detail {

/// Smallest truncation length L with the geometric tail bound
/// sum over max|n_j| > L of r^{|n|_1} below tail_tol.
inline int poisson_truncation_length(int k, double r, double tail_tol, int cap) {
    const double prefactor =
        2.0 * k / (1.0 - r) * std::pow((1.0 + r) / (1.0 - r), k - 1);
    double r_pow = r; // r^{L+1} at L = 0
    for (int L = 0; L <= cap; ++L) {
        if (prefactor * r_pow < tail_tol) return L;
        r_pow *= r;
    }
    throw TailBoundUnreachable("compressed_poisson: truncation cap " + std::to_string(cap) +
                               " too small for r = " + std::to_string(r));
}

/// Truncated compressed Poisson kernel sum over the box max|n_j| <= L of
/// r^{|n|_1} conj(w)^n T(n), evaluated orthant-by-orthant through partial
/// geometric sums of Z_j = r conj(w_j) T_j. Exactly the box-truncated series,
/// reorganized so each point costs O(k L) small multiplications.
inline ComplexMatrix poisson_kernel_truncated(const std::vector<ComplexMatrix>& ops, double r,
                                              const ComplexVector& w, int L) {
    const int k = static_cast<int>(ops.size());
    const Eigen::Index n = ops.front().rows();
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);

    std::vector<ComplexMatrix> full(k); // sum_{m=0}^{L} Z_j^m
    std::vector<ComplexMatrix> tail(k); // sum_{m=1}^{L} Z_j^m
    for (int j = 0; j < k; ++j) {
        const ComplexMatrix z = (r * std::conj(w(j))) * ops[j];
        ComplexMatrix horner = id;
        for (int m = 0; m < L; ++m) horner = id + z * horner;
        full[j] = horner;
        tail[j] = horner - id;
    }

    ComplexMatrix acc = ComplexMatrix::Zero(n, n);
    for (std::uint32_t mask = 0; mask < (std::uint32_t(1) << k); ++mask) {
        ComplexMatrix left = id;
        ComplexMatrix right = id;
        for (int j = 0; j < k; ++j) {
            if (mask & (std::uint32_t(1) << j))
                left = left * tail[j];
            else
                right = right * full[j];
        }
        acc += left.adjoint() * right;
    }
    return acc;
}

/// Frobenius projection onto the PSD cone with a closed-form 2x2 fast path.
inline ComplexMatrix psd_clip_fast(const ComplexMatrix& x) {
    if (x.rows() == 2) {
        const Complex a = 0.5 * (x(0, 0) + std::conj(x(0, 0)));
        const Complex d = 0.5 * (x(1, 1) + std::conj(x(1, 1)));
        const Complex b = 0.5 * (x(0, 1) + std::conj(x(1, 0)));
        const double mean = 0.5 * (a.real() + d.real());
        const double radius =
            std::sqrt(0.25 * (a.real() - d.real()) * (a.real() - d.real()) + std::norm(b));
        const double lo = mean - radius, hi = mean + radius;
        ComplexMatrix h(2, 2);
        h << a, b, std::conj(b), d;
        if (lo >= 0.0) return h;
        ComplexMatrix result = ComplexMatrix::Zero(2, 2);
        if (hi <= 0.0) return result;
        // rank-one piece hi * P_hi with P_hi = (H - lo I)/(hi - lo)
        result = (hi / (hi - lo)) * (h - lo * ComplexMatrix::Identity(2, 2));
        return result;
    }
    return psd_clip(x);
}

} // namespace detail

/// Compression of the operator Poisson kernel of the polydisc at radius r:
/// the box-truncated series sum_{max|n_j| <= L} r^{|n|_1} conj(w)^n T(n),
/// with L chosen so the scalar geometric tail is below tail_tol. Requires a
/// regular tuple, for which the full series is the compression of a positive
/// operator; the result is Hermitian with min eigenvalue >= -tail_tol.
inline ComplexMatrix compressed_poisson(const ContractionTuple& tuple, double r,
                                        const ComplexVector& w, double tail_tol = 1e-9,
                                        int truncation_cap = 4096) {
    if (!(r > 0.0 && r < 1.0)) throw OutOfDisc("compressed_poisson: r must be in (0,1)");
    if (w.size() != tuple.k()) throw ShapeMismatch("compressed_poisson: point arity mismatch");
    if (!brehmer_check(tuple).holds)
        throw NotRegular("compressed_poisson: tuple fails the regularity inequalities");
    const int L = detail::poisson_truncation_length(tuple.k(), r, tail_tol, truncation_cap);
    return hermitize(detail::poisson_kernel_truncated(tuple.ops, r, w, L));
}

/// Warm-start POVM for the moment feasibility solve. Regular tuples are
/// seeded with the compressed Poisson kernel at radius r, whose grid measure
/// nearly reproduces the moments of rT; other tuples get the uniform seed.
/// Weights are symmetrically rescaled so they sum to the identity exactly;
/// the declared residual is the recomputed worst moment deviation.
inline AtomicPOVM seed_povm(const ContractionTuple& tuple, double r, const TorusGrid& grid,
                            const MultiIndexSet& index_set, double tail_tol = 1e-9,
                            int truncation_cap = 4096) {
    if (grid.k != tuple.k()) throw ShapeMismatch("seed_povm: grid arity mismatch");
    const Eigen::Index n = tuple.dim();
    const std::size_t m = grid.size();
    const double cell = 1.0 / static_cast<double>(m);

    AtomicPOVM povm;
    povm.k = tuple.k();
    povm.n = n;
    povm.index_set = index_set;
    povm.atoms.resize(m);

    const bool regular = brehmer_check(tuple).holds;
    int L = 0;
    if (regular && !(r > 0.0 && r < 1.0))
        throw OutOfDisc("seed_povm: r must be in (0,1)");
    if (regular) L = detail::poisson_truncation_length(tuple.k(), r, tail_tol, truncation_cap);

    for (std::size_t i = 0; i < m; ++i) {
        povm.atoms[i].point = grid.point(i);
        if (regular) {
            povm.atoms[i].weight =
                cell * hermitize(detail::poisson_kernel_truncated(tuple.ops, r,
                                                                  povm.atoms[i].point, L));
        } else {
            povm.atoms[i].weight = cell * ComplexMatrix::Identity(n, n);
        }
    }

    // force sum = identity by symmetric conjugation
    ComplexMatrix total = ComplexMatrix::Zero(n, n);
    for (const TorusAtom& atom : povm.atoms) total += atom.weight;
    HermEig eig = herm_eig(hermitize(total), 1e-8);
    RealVector inv_root(eig.values.size());
    for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
        if (eig.values(i) <= 0.0)
            throw NotPOVM("seed_povm: weight sum is not positive definite");
        inv_root(i) = 1.0 / std::sqrt(eig.values(i));
    }
    const ComplexMatrix scale = eig.vectors * inv_root.asDiagonal() * eig.vectors.adjoint();
    for (TorusAtom& atom : povm.atoms) atom.weight = hermitize(scale * atom.weight * scale);

    povm.residual = moment_residual(povm, tuple_symbols(tuple, index_set));
    return povm;
}

/// Residual checkpoints recorded by refine_povm: the prefix minima of the
/// per-iteration combined residual, ending at the returned iterate's value.
struct RefineTrace {
    std::vector<double> checkpoints;
    int iterations = 0;
};

/// Moment feasibility by Dykstra alternating projections between the affine
/// set {sum_i w_i^n A_i = T(n) for n in index_set} and the product PSD cone.
/// The affine projection solves one Gram system per index set and applies it
/// entrywise. Returns the first PSD iterate whose moment residual is <= tol;
/// throws FeasibilityNotReached with the best residual otherwise.
inline AtomicPOVM refine_povm(const AtomicPOVM& seed, const ContractionTuple& tuple,
                              const MultiIndexSet& index_set, double tol = 1e-8,
                              int max_iter = 5000, RefineTrace* trace = nullptr) {
    const Eigen::Index n = tuple.dim();
    const std::size_t m = seed.atoms.size();
    const std::size_t rows = index_set.size();
    if (m == 0) throw NotPOVM("refine_povm: empty seed");

    bool has_zero = false;
    for (const auto& idx : index_set.indices)
        if (abs_degree(idx) == 0) has_zero = true;
    if (!has_zero) throw Error("refine_povm: index set must include the zero index");
    for (const TorusAtom& atom : seed.atoms)
        for (Eigen::Index j = 0; j < atom.point.size(); ++j)
            if (std::abs(std::abs(atom.point(j)) - 1.0) > 1e-12)
                throw NotPOVM("refine_povm: seed atom off the torus");

    const std::vector<ComplexMatrix> targets = tuple_symbols(tuple, index_set);

    // point-evaluation matrix W(r, i) = w_i^{n_r} and pseudo-inverse of its Gram
    ComplexMatrix W(rows, m);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t i = 0; i < m; ++i)
            W(r, i) = point_power(seed.atoms[i].point, index_set.indices[r]);
    const ComplexMatrix gram = W * W.adjoint();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> gram_eig(gram);
    if (gram_eig.info() != Eigen::Success)
        throw ConvergenceFailure("refine_povm: Gram eigensolver failed");
    const double cutoff = 1e-12 * std::max(1.0, gram_eig.eigenvalues().maxCoeff());
    RealVector gram_inv(rows);
    for (std::size_t r = 0; r < rows; ++r)
        gram_inv(r) = gram_eig.eigenvalues()(r) > cutoff ? 1.0 / gram_eig.eigenvalues()(r) : 0.0;
    const ComplexMatrix gram_pinv = gram_eig.eigenvectors() * gram_inv.asDiagonal() *
                                    gram_eig.eigenvectors().adjoint();

    auto moment_gaps = [&](const std::vector<ComplexMatrix>& x) {
        std::vector<ComplexMatrix> gaps(rows, ComplexMatrix::Zero(n, n));
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t i = 0; i < m; ++i) gaps[r] += W(r, i) * x[i];
            gaps[r] -= targets[r];
        }
        return gaps;
    };
    auto affine_project = [&](std::vector<ComplexMatrix>& x) {
        const std::vector<ComplexMatrix> gaps = moment_gaps(x);
        std::vector<ComplexMatrix> corr(rows, ComplexMatrix::Zero(n, n));
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t q = 0; q < rows; ++q) corr[r] += gram_pinv(r, q) * gaps[q];
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t r = 0; r < rows; ++r) x[i] -= std::conj(W(r, i)) * corr[r];
    };

    std::vector<ComplexMatrix> y(m), delta(m, ComplexMatrix::Zero(n, n)), x(m);
    for (std::size_t i = 0; i < m; ++i) y[i] = seed.atoms[i].weight;

    double best_residual = std::numeric_limits<double>::infinity();
    std::vector<ComplexMatrix> best = y;
    RefineTrace local_trace;
    RefineTrace& tr = trace ? *trace : local_trace;

    for (int iter = 1; iter <= max_iter; ++iter) {
        for (std::size_t i = 0; i < m; ++i) {
            const ComplexMatrix r_i = y[i] - delta[i];
            x[i] = detail::psd_clip_fast(r_i);
            delta[i] = x[i] - r_i;
        }
        double residual = 0.0;
        for (const ComplexMatrix& gap : moment_gaps(x)) residual = std::max(residual, op_norm(gap));
        if (residual < best_residual) {
            best_residual = residual;
            best = x;
            tr.checkpoints.push_back(residual);
        }
        tr.iterations = iter;
        if (best_residual <= tol) break;
        y = x;
        affine_project(y);
    }

    if (best_residual > tol)
        throw FeasibilityNotReached("refine_povm: residual " + std::to_string(best_residual) +
                                        " after " + std::to_string(tr.iterations) + " iterations",
                                    best_residual);

    AtomicPOVM out;
    out.k = seed.k;
    out.n = n;
    out.index_set = index_set;
    out.atoms.resize(m);
    for (std::size_t i = 0; i < m; ++i) out.atoms[i] = {seed.atoms[i].point, best[i]};
    out.residual = moment_residual(out, targets);
    return out;
}

/// Prunes an atomic POVM to at most M_cap atoms while preserving every moment
/// over the index set. Each atom is split as a scalar mass times a trace-n
/// density; null combinations of the (real) moment embeddings shift mass to
/// zero out one atom per step, so non-negativity and all moments survive.
inline AtomicPOVM caratheodory_reduce(const AtomicPOVM& povm, const MultiIndexSet& index_set,
                                      std::size_t m_cap) {
    const Eigen::Index n = povm.n;
    const std::size_t rows = index_set.size();
    const std::size_t min_cap = static_cast<std::size_t>(n) * (n + 1) * rows + 1;
    if (m_cap < min_cap)
        throw Error("caratheodory_reduce: cap " + std::to_string(m_cap) +
                    " below the Caratheodory bound " + std::to_string(min_cap));
    if (povm.atoms.size() <= m_cap) return povm;

    const std::vector<ComplexMatrix> input_moments = [&] {
        std::vector<ComplexMatrix> ms;
        ms.reserve(rows);
        for (const auto& idx : index_set.indices) ms.push_back(povm_moment(povm, idx));
        return ms;
    }();

    struct Mass {
        double a;
        ComplexMatrix rho;
        ComplexVector point;
    };
    std::vector<Mass> active;
    active.reserve(povm.atoms.size());
    for (const TorusAtom& atom : povm.atoms) {
        const double tr = atom.weight.trace().real();
        if (tr < kTol.atom_drop) continue; // degenerate atom, carries no mass
        const double a = tr / static_cast<double>(n);
        active.push_back({a, atom.weight / a, atom.point});
    }

    // real embedding of one atom: Re/Im of all entries of w^n rho over the
    // index set, plus the constant coordinate
    const std::size_t dim = 2 * static_cast<std::size_t>(n) * n * rows + 1;
    auto embed = [&](const Mass& mass, Eigen::VectorXd& v) {
        std::size_t pos = 0;
        for (std::size_t r = 0; r < rows; ++r) {
            const Complex wn = point_power(mass.point, index_set.indices[r]);
            for (Eigen::Index p = 0; p < n; ++p)
                for (Eigen::Index q = 0; q < n; ++q) {
                    const Complex e = wn * mass.rho(p, q);
                    v(pos++) = e.real();
                    v(pos++) = e.imag();
                }
        }
        v(pos) = 1.0;
    };

    const std::size_t subset = dim + 1; // guarantees a null combination
    std::vector<std::size_t> order(0);
    while (active.size() > m_cap) {
        const std::size_t s = std::min(active.size(), subset);
        Eigen::MatrixXd embeddings(dim, s);
        Eigen::VectorXd column(dim);
        for (std::size_t i = 0; i < s; ++i) {
            embed(active[i], column);
            embeddings.col(i) = column;
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(embeddings, Eigen::ComputeFullV);
        Eigen::VectorXd c = svd.matrixV().col(s - 1);
        if (c.cwiseAbs().maxCoeff() < 1e-14)
            throw NumericalDegeneracy("caratheodory_reduce: vanishing null direction");
        if (c.maxCoeff() <= 0.0) c = -c;

        double step = std::numeric_limits<double>::infinity();
        std::size_t victim = s;
        for (std::size_t i = 0; i < s; ++i) {
            if (c(i) > 1e-14) {
                const double ratio = active[i].a / c(i);
                if (ratio < step) {
                    step = ratio;
                    victim = i;
                }
            }
        }
        if (victim == s)
            throw NumericalDegeneracy("caratheodory_reduce: no positive step direction");

        for (std::size_t i = 0; i < s; ++i) active[i].a -= step * c(i);
        active[victim].a = 0.0;
        std::erase_if(active, [](const Mass& mass) { return mass.a <= 0.0; });
        if (active.empty()) throw NumericalDegeneracy("caratheodory_reduce: all mass removed");
    }

    AtomicPOVM out;
    out.k = povm.k;
    out.n = n;
    out.index_set = index_set;
    out.atoms.reserve(active.size());
    for (const Mass& mass : active) out.atoms.push_back({mass.point, mass.a * mass.rho});

    double drift = 0.0;
    for (std::size_t r = 0; r < rows; ++r)
        drift = std::max(drift,
                         op_norm(povm_moment(out, index_set.indices[r]) - input_moments[r]));
    const double allowed = std::max(9.0 * povm.residual, 1e-12);
    if (drift > allowed)
        throw NumericalDegeneracy("caratheodory_reduce: moment drift " + std::to_string(drift) +
                                  " exceeds budget");
    out.residual = povm.residual + drift;
    return out;
}

} // namespace ndil
