#pragma once

// Dense kernels over complex scalars. Real matrices are the zero-imaginary
// special case, so the adjoint is always the conjugate transpose.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "balsel/errors.hpp"

namespace balsel {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class Field { real, complex };

/// `real` iff every imaginary part is exactly zero.
Field field_of(const Matrix& m);

/// Column-pivoted Householder QR, V·P = Q·R.
///
/// `pivot_order[k]` is the (0-based) column of V placed at position k, so
/// column k of V·P is column pivot_order[k] of V. `r_diagonal` has one entry
/// per column of V: |R_kk| for k < min(rows, cols) and zero afterwards, which
/// is the residual norm of the column chosen at that step.
struct PivotedQR {
    Matrix q_factor;
    Matrix r_factor;
    std::vector<Index> pivot_order;
    std::vector<double> r_diagonal;

    /// Dense permutation matrix P with V·P = Q·R.
    Matrix permutation() const;
};

/// Businger-Golub pivoting: step k picks the unchosen column with the largest
/// residual 2-norm, lowest index on ties. Throws DimensionError on empty V.
PivotedQR pivoted_qr(const Matrix& v);

/// As above, but columns flagged in `excluded` are never chosen as pivots
/// while still being orthogonalized against the chosen ones. Excluded columns
/// trail the pivot order in ascending index order.
PivotedQR pivoted_qr(const Matrix& v, std::span<const bool> excluded);

struct SvdResult {
    Matrix u;
    RealVector singular_values;  // non-increasing
    Matrix v;
};

/// Full SVD a = u·diag(s)·v*. Backed by Eigen's divide-and-conquer SVD.
SvdResult svd(const Matrix& a);

struct SchurResult {
    Matrix u;  // unitary
    Matrix t;  // upper triangular
};

/// Complex Schur form a = u·t·u*. Throws NumericError on non-convergence.
SchurResult schur(const Matrix& a);

/// Reorder a complex Schur form in place so that diagonal entries for which
/// `select` holds come first, keeping a = u·t·u*. Returns how many were
/// selected.
template <typename Pred>
Index reorder_schur(SchurResult& s, Pred select);

/// Swap the adjacent diagonal entries k and k+1 of a triangular Schur form.
void swap_schur_adjacent(SchurResult& s, Index k);

/// log|det a| as the sum of log|R_ii| from the pivoted QR.
/// Throws SingularityError if any |R_ii| < 1e-14·|R_11|.
double logdet_abs(const Matrix& a);

/// e^{a·t}·x via scaling-and-squaring Padé (Eigen MatrixFunctions).
Vector matrix_exponential_apply(const Matrix& a, double t, const Vector& x);

/// e^{a·t} as a dense matrix.
Matrix matrix_exponential(const Matrix& a, double t);

/// Largest singular value.
double norm2(const Matrix& a);

/// Smallest singular value over min(rows, cols).
double sigma_min(const Matrix& a);

/// Eigenvalues through the Schur form.
Vector eigenvalues(const Matrix& a);

/// Hermitian part (a + a*)/2.
Matrix hermitian_part(const Matrix& a);

// ---------------------------------------------------------------------------

template <typename Pred>
Index reorder_schur(SchurResult& s, Pred select) {
    const Index n = s.t.rows();
    Index placed = 0;
    for (Index i = 0; i < n; ++i) {
        if (!select(s.t(i, i))) continue;
        // bubble entry i up to position `placed`
        for (Index k = i - 1; k >= placed; --k) swap_schur_adjacent(s, k);
        ++placed;
    }
    return placed;
}

}  // namespace balsel
