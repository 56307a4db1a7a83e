#pragma once

#include <complex>
#include <vector>

#include "oia/rng.hpp"

namespace oia {

using cxd = std::complex<double>;

/// Dense row-major complex matrix. Small sizes only (antenna dimensions),
/// so everything is plain loops with no blocking.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    static ComplexMatrix identity(int n);
    static ComplexMatrix zero(int rows, int cols) { return ComplexMatrix(rows, cols); }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    cxd& operator()(int r, int c) { return data_[r * cols_ + c]; }
    const cxd& operator()(int r, int c) const { return data_[r * cols_ + c]; }

    const std::vector<cxd>& data() const { return data_; }

    ComplexMatrix adjoint() const;

    ComplexMatrix operator*(const ComplexMatrix& rhs) const;
    ComplexMatrix operator+(const ComplexMatrix& rhs) const;
    ComplexMatrix operator-(const ComplexMatrix& rhs) const;
    ComplexMatrix scaled(cxd factor) const;

    double frobenius_norm_sq() const;
    double max_abs() const;

    /// True when every entry is finite.
    bool is_finite() const;

    /// Max |A - A^dagger| entry; 0 for exactly Hermitian matrices.
    double hermiticity_error() const;

    /// Column c multiplied in place by a (unit-modulus) scalar.
    void scale_column(int c, cxd factor);

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<cxd> data_;
};

/// Gaussian matrix with i.i.d. CN(0,1) entries, drawn row-major.
ComplexMatrix random_gaussian_matrix(int rows, int cols, Rng& rng);

/// Orthonormalizes the columns (modified Gram-Schmidt with one
/// re-orthogonalization pass). Requires cols <= rows and full column rank.
ComplexMatrix orthonormalize_columns(const ComplexMatrix& m);

/// Random matrix with d orthonormal columns (QR of a Gaussian draw).
ComplexMatrix random_orthonormal_columns(int rows, int d, Rng& rng);

struct HermitianEig {
    std::vector<double> eigenvalues;  // ascending
    ComplexMatrix eigenvectors;       // column k pairs with eigenvalues[k]
};

/// Full eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.
/// Throws std::invalid_argument when the input is not Hermitian within 1e-10
/// (relative to its largest entry).
HermitianEig hermitian_eig(const ComplexMatrix& q);

/// d orthonormal columns spanning the eigenspace of the d smallest
/// eigenvalues of a Hermitian matrix.
ComplexMatrix smallest_eigvecs(const ComplexMatrix& q, int d);

/// Singular values of m in descending order (via eigenvalues of m^dagger m).
std::vector<double> singular_values(const ComplexMatrix& m);

}  // namespace oia
