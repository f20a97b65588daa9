#pragma once

#include <bit>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include "ndilation/errors.hpp"
#include "ndilation/matcore.hpp"
#include "ndilation/multi_index.hpp"
#include "ndilation/types.hpp"

namespace ndil {

/// A k-tuple of square matrices on a common n-dimensional space, nominally
/// commuting contractions. Commutativity and contractivity are checked by
/// validate(), not at construction, so near-miss measured data can still be
/// diagnosed.
struct ContractionTuple {
    std::vector<ComplexMatrix> ops;

    ContractionTuple() = default;
    explicit ContractionTuple(std::vector<ComplexMatrix> operators) : ops(std::move(operators)) {
        if (ops.empty()) throw ShapeMismatch("ContractionTuple: need at least one operator");
        const Eigen::Index n = ops.front().rows();
        for (const ComplexMatrix& t : ops) {
            if (t.rows() != t.cols() || t.rows() != n)
                throw ShapeMismatch("ContractionTuple: operators must be square and equally sized");
            if (!entries_finite(t))
                throw ValidationFailed("ContractionTuple: non-finite entries");
        }
    }

    int k() const { return static_cast<int>(ops.size()); }
    Eigen::Index dim() const { return ops.front().rows(); }
};

struct BrehmerResult {
    bool holds = false;
    std::vector<int> worst_subset; ///< 0-based operator indices of the worst S
    double min_eig = 0.0;
};

struct TupleReport {
    bool commuting = false;
    double worst_commutator = 0.0;
    bool contractive = false;
    double worst_norm = 0.0;
    bool brehmer = false;
    std::vector<int> brehmer_worst_subset;
    double brehmer_min_eig = 0.0;
    bool doubly_commuting = false;
    double worst_star_commutator = 0.0;

    bool valid() const { return commuting && contractive; }
};

namespace detail {

inline ComplexMatrix matrix_power(const ComplexMatrix& t, int p) {
    ComplexMatrix result = ComplexMatrix::Identity(t.rows(), t.cols());
    for (int i = 0; i < p; ++i) result = result * t;
    return result;
}

/// Products T_I over all bitmask subsets I of the operator list.
inline std::vector<ComplexMatrix> subset_products(const std::vector<ComplexMatrix>& ops) {
    const int k = static_cast<int>(ops.size());
    const Eigen::Index n = ops.front().rows();
    std::vector<ComplexMatrix> prod(std::size_t(1) << k);
    prod[0] = ComplexMatrix::Identity(n, n);
    for (std::uint32_t mask = 1; mask < prod.size(); ++mask) {
        const std::uint32_t low = mask & (~mask + 1);
        const int idx = std::countr_zero(low);
        prod[mask] = ops[idx] * prod[mask ^ low];
    }
    return prod;
}

} // namespace detail

/// The mixed symbol T(n) = (prod_j T_j^{(n_j)_-})* prod_j T_j^{(n_j)_+}.
/// Powers are formed by repeated multiplication, which is exact for nilpotent
/// inputs. symbol(0) is the identity.
inline ComplexMatrix symbol(const std::vector<ComplexMatrix>& ops, const std::vector<int>& n) {
    if (ops.empty() || n.size() != ops.size())
        throw ShapeMismatch("symbol: exponent count must match operator count");
    const Eigen::Index dim = ops.front().rows();
    ComplexMatrix pos = ComplexMatrix::Identity(dim, dim);
    ComplexMatrix neg = ComplexMatrix::Identity(dim, dim);
    for (std::size_t j = 0; j < ops.size(); ++j) {
        if (n[j] > 0) pos = pos * detail::matrix_power(ops[j], n[j]);
        if (n[j] < 0) neg = neg * detail::matrix_power(ops[j], -n[j]);
    }
    return neg.adjoint() * pos;
}

inline ComplexMatrix symbol(const ContractionTuple& tuple, const std::vector<int>& n) {
    return symbol(tuple.ops, n);
}

/// Linear extension of the symbol calculus: sum_n coeffs(n) T(n). In analytic
/// mode indices with negative entries are rejected.
inline ComplexMatrix eval_function(const ContractionTuple& tuple,
                                   const std::map<std::vector<int>, Complex>& coeffs,
                                   IndexMode mode) {
    const Eigen::Index n = tuple.dim();
    ComplexMatrix result = ComplexMatrix::Zero(n, n);
    for (const auto& [index, c] : coeffs) {
        if (static_cast<int>(index.size()) != tuple.k())
            throw ShapeMismatch("eval_function: index arity mismatch");
        if (mode == IndexMode::analytic)
            for (int e : index)
                if (e < 0)
                    throw IndexOutOfMode("eval_function: negative exponent in analytic mode");
        result += c * symbol(tuple, index);
    }
    return result;
}

/// Tests the operator inequalities sum_{I subset S} (-1)^|I| T_I* T_I >= 0
/// over every subset S of the tuple, the necessary and sufficient condition
/// for a regular unitary dilation. Returns the subset attaining the smallest
/// eigenvalue.
inline BrehmerResult brehmer_check(const ContractionTuple& tuple, double tol = kTol.psd_floor) {
    const int k = tuple.k();
    if (k > 20) throw TooManyOperators("brehmer_check: k > 20");
    const Eigen::Index n = tuple.dim();
    const std::vector<ComplexMatrix> prod = detail::subset_products(tuple.ops);

    BrehmerResult result;
    result.min_eig = 1.0; // S = {} gives the identity
    for (std::uint32_t s = 1; s < (std::uint32_t(1) << k); ++s) {
        ComplexMatrix acc = ComplexMatrix::Identity(n, n);
        for (std::uint32_t sub = s;; sub = (sub - 1) & s) {
            if (sub != 0) {
                const double sign = (std::popcount(sub) % 2 == 0) ? 1.0 : -1.0;
                acc += sign * (prod[sub].adjoint() * prod[sub]);
            }
            if (sub == 0) break;
        }
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(hermitize(acc),
                                                         Eigen::EigenvaluesOnly);
        const double lambda = eig.eigenvalues().minCoeff();
        if (lambda < result.min_eig) {
            result.min_eig = lambda;
            result.worst_subset.clear();
            for (int i = 0; i < k; ++i)
                if (s & (std::uint32_t(1) << i)) result.worst_subset.push_back(i);
        }
    }
    result.holds = result.min_eig >= -tol;
    return result;
}

struct DoublyCommutingResult {
    bool holds = false;
    double worst_deviation = 0.0;
};

/// max over i != j of ||T_i T_j* - T_j* T_i||.
inline DoublyCommutingResult doubly_commuting_check(const ContractionTuple& tuple,
                                                    double tol = kTol.commute) {
    double worst = 0.0;
    for (int i = 0; i < tuple.k(); ++i)
        for (int j = 0; j < tuple.k(); ++j) {
            if (i == j) continue;
            worst = std::max(worst, op_norm(tuple.ops[i] * tuple.ops[j].adjoint() -
                                            tuple.ops[j].adjoint() * tuple.ops[i]));
        }
    return {worst <= tol, worst};
}

inline TupleReport validate(const ContractionTuple& tuple, double tol = kTol.commute) {
    TupleReport report;
    for (int i = 0; i < tuple.k(); ++i)
        for (int j = i + 1; j < tuple.k(); ++j)
            report.worst_commutator =
                std::max(report.worst_commutator,
                         op_norm(tuple.ops[i] * tuple.ops[j] - tuple.ops[j] * tuple.ops[i]));
    report.commuting = report.worst_commutator <= tol;

    for (const ComplexMatrix& t : tuple.ops)
        report.worst_norm = std::max(report.worst_norm, op_norm(t));
    report.contractive = report.worst_norm <= 1.0 + tol;

    BrehmerResult brehmer = brehmer_check(tuple, tol);
    report.brehmer = brehmer.holds;
    report.brehmer_worst_subset = brehmer.worst_subset;
    report.brehmer_min_eig = brehmer.min_eig;

    DoublyCommutingResult doubly = doubly_commuting_check(tuple, tol);
    report.doubly_commuting = doubly.holds;
    report.worst_star_commutator = doubly.worst_deviation;
    return report;
}

} // namespace ndil
