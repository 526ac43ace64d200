#pragma once

#include <complex>
#include <vector>

#include "bjgmres/dense_matrix.hpp"

namespace bjgmres {

/// Eigenvalues of a real upper-Hessenberg matrix by shifted QR iteration in
/// complex arithmetic (unshifted exceptional sweeps break stagnation).
/// Returned ascending by real part, then imaginary part. Diagnostic routine:
/// throws on non-convergence after the iteration cap.
std::vector<std::complex<double>> ritz_values(const DenseMatrix& h);

} // namespace bjgmres
