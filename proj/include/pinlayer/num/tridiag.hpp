#pragma once

#include <cmath>
#include <vector>

#include "pinlayer/errors.hpp"

namespace pinlayer::num {

// Tridiagonal solve with partial pivoting (the dgtsv elimination). Bands are
// lower[i] = A(i,i-1) (lower[0] unused), diag[i] = A(i,i), upper[i] = A(i,i+1)
// (upper[n-1] unused). Overwrites rhs with the solution; bands are taken by
// value and destroyed.
inline void tridiag_solve(std::vector<double> lower, std::vector<double> diag,
                          std::vector<double> upper, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    if (n == 0) return;
    if (n == 1) {
        if (diag[0] == 0.0) throw LinearSolveFailure("tridiag_solve: zero pivot");
        rhs[0] /= diag[0];
        return;
    }
    std::vector<double> du2(n, 0.0); // fill-in from row interchanges
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double sub = lower[i + 1];
        if (std::abs(diag[i]) >= std::abs(sub)) {
            if (diag[i] == 0.0) throw LinearSolveFailure("tridiag_solve: zero pivot");
            const double fact = sub / diag[i];
            diag[i + 1] -= fact * upper[i];
            rhs[i + 1] -= fact * rhs[i];
        } else {
            const double fact = diag[i] / sub;
            diag[i] = sub;
            const double temp = diag[i + 1];
            diag[i + 1] = upper[i] - fact * temp;
            if (i + 2 < n) {
                du2[i] = upper[i + 1];
                upper[i + 1] = -fact * du2[i];
            }
            upper[i] = temp;
            const double rtemp = rhs[i];
            rhs[i] = rhs[i + 1];
            rhs[i + 1] = rtemp - fact * rhs[i + 1];
        }
    }
    if (diag[n - 1] == 0.0) throw LinearSolveFailure("tridiag_solve: zero pivot");
    rhs[n - 1] /= diag[n - 1];
    if (n >= 2) rhs[n - 2] = (rhs[n - 2] - upper[n - 2] * rhs[n - 1]) / diag[n - 2];
    for (std::size_t i = n - 2; i-- > 0;)
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1] - du2[i] * rhs[i + 2]) / diag[i];
}

} // namespace pinlayer::num
