#pragma once

#include <utility>
#include <vector>

#include "trajthermo/matrix.hpp"

namespace trajthermo {

struct EigResult {
    std::vector<double> values;  // ascending
    ComplexMatrix vectors;       // columns, matching values
};

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
/// Throws NotHermitian if the input fails the symmetry check.
EigResult herm_eig(const ComplexMatrix& a);

/// exp(-i H) for Hermitian H, via eigendecomposition.
ComplexMatrix mat_exp_mi(const ComplexMatrix& h);

/// Principal square root of a Hermitian PSD matrix. Eigenvalues in
/// [-psd_clamp, 0) are clamped to zero; anything below throws NotPSD.
ComplexMatrix mat_sqrt_psd(const ComplexMatrix& a);

/// Inverse by Gauss-Jordan elimination with partial pivoting.
/// Throws Singular (with a condition-number diagnostic) when the smallest
/// singular value is below inverse_rcond times the largest.
ComplexMatrix mat_inv(const ComplexMatrix& a);

/// (smallest, largest) singular value, via herm_eig of A^dag A.
std::pair<double, double> singular_extent(const ComplexMatrix& a);

/// Completes an n x m isometry (m < n) to an n x n unitary whose first m
/// columns equal V exactly. Complement columns come from Gram-Schmidt over
/// standard basis vectors in the fixed order e_2, e_3, e_0, e_1, ... so the
/// result is deterministic.
ComplexMatrix complete_isometry(const ComplexMatrix& v);

}  // namespace trajthermo
