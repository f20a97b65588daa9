#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "ndilation/errors.hpp"

namespace ndil {

/// analytic: exponents n >= 0 with sum(n_j) <= N, the monomial basis of the
/// degree-N polynomial space. mixed: signed exponents with sum(|n_j|) <= N,
/// the monomial basis z^{n_+} conj(z)^{n_-} of the mixed analytic/co-analytic
/// space.
enum class IndexMode { analytic, mixed };

inline std::string to_string(IndexMode mode) {
    return mode == IndexMode::analytic ? "analytic" : "mixed";
}

inline std::uint64_t binomial(int n, int r) {
    if (r < 0 || r > n) return 0;
    r = std::min(r, n - r);
    std::uint64_t result = 1;
    for (int i = 1; i <= r; ++i) result = result * static_cast<std::uint64_t>(n - r + i) / i;
    return result;
}

/// dim of the analytic monomial basis: (N+k)! / (N! k!).
inline std::uint64_t analytic_dimension(int k, int degree) {
    return binomial(degree + k, k);
}

inline int abs_degree(const std::vector<int>& n) {
    int total = 0;
    for (int e : n) total += std::abs(e);
    return total;
}

/// Enumerated exponent set in graded lexicographic order: ascending total
/// degree sum(|n_j|), lexicographic within a degree.
struct MultiIndexSet {
    int k = 0;
    int degree = 0;
    IndexMode mode = IndexMode::analytic;
    std::vector<std::vector<int>> indices;

    std::size_t size() const { return indices.size(); }

    bool contains(const std::vector<int>& n) const {
        if (static_cast<int>(n.size()) != k) return false;
        if (abs_degree(n) > degree) return false;
        if (mode == IndexMode::analytic)
            for (int e : n)
                if (e < 0) return false;
        return true;
    }
};

namespace detail {

inline void enumerate_rec(int k, int budget, bool signed_entries, std::vector<int>& current,
                          std::vector<std::vector<int>>& out) {
    if (static_cast<int>(current.size()) == k) {
        out.push_back(current);
        return;
    }
    const int lo = signed_entries ? -budget : 0;
    for (int e = lo; e <= budget; ++e) {
        current.push_back(e);
        enumerate_rec(k, budget - std::abs(e), signed_entries, current, out);
        current.pop_back();
    }
}

} // namespace detail

inline MultiIndexSet enumerate_indices(int k, int degree, IndexMode mode) {
    if (k < 1) throw Error("enumerate_indices: k must be >= 1");
    if (degree < 0) throw Error("enumerate_indices: degree must be >= 0");
    MultiIndexSet set;
    set.k = k;
    set.degree = degree;
    set.mode = mode;
    std::vector<int> current;
    detail::enumerate_rec(k, degree, mode == IndexMode::mixed, current, set.indices);
    std::sort(set.indices.begin(), set.indices.end(),
              [](const std::vector<int>& a, const std::vector<int>& b) {
                  const int da = abs_degree(a), db = abs_degree(b);
                  if (da != db) return da < db;
                  return a < b;
              });
    return set;
}

} // namespace ndil
