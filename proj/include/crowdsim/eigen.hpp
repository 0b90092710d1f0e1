#pragma once

#include <vector>

#include "crowdsim/matrix.hpp"

namespace crowd {

struct EigenDecomposition {
    std::vector<double> values;  ///< descending
    Matrix vectors;              ///< column k pairs with values[k]
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
/// 1e-12 of the matrix norm. Eigenvectors are orthonormal and signed so that
/// their largest-magnitude component (first one on ties) is positive.
/// Throws std::invalid_argument for non-square or non-symmetric input.
EigenDecomposition symmetric_eigen(const Matrix& m);

}  // namespace crowd
