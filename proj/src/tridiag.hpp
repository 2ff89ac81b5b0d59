#pragma once

#include <vector>

namespace nnlif::detail {

// Thomas algorithm. lower[i] couples x[i-1], upper[i] couples x[i+1].
// Returns false on a vanishing pivot.
inline bool solve_tridiagonal(const std::vector<double>& lower, const std::vector<double>& diag,
                              const std::vector<double>& upper, std::vector<double>& rhs,
                              std::vector<double>& work) {
    const size_t m = diag.size();
    if (m == 0) return true;
    work.resize(m);
    double piv = diag[0];
    if (piv == 0.0) return false;
    work[0] = upper[0] / piv;
    rhs[0] /= piv;
    for (size_t i = 1; i < m; ++i) {
        piv = diag[i] - lower[i] * work[i - 1];
        if (piv == 0.0) return false;
        work[i] = upper[i] / piv;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / piv;
    }
    for (size_t i = m - 1; i-- > 0;) rhs[i] -= work[i] * rhs[i + 1];
    return true;
}

} // namespace nnlif::detail
