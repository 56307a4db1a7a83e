#include "oia/complexmat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace oia {

ComplexMatrix ComplexMatrix::identity(int n) {
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
    return out;
}

ComplexMatrix ComplexMatrix::operator*(const ComplexMatrix& rhs) const {
    if (cols_ != rhs.rows_) throw std::invalid_argument("matrix product: inner dimensions differ");
    ComplexMatrix out(rows_, rhs.cols_);
    for (int r = 0; r < rows_; ++r) {
        for (int k = 0; k < cols_; ++k) {
            const cxd a = (*this)(r, k);
            if (a == cxd{}) continue;
            for (int c = 0; c < rhs.cols_; ++c) out(r, c) += a * rhs(k, c);
        }
    }
    return out;
}

ComplexMatrix ComplexMatrix::operator+(const ComplexMatrix& rhs) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
        throw std::invalid_argument("matrix sum: shapes differ");
    ComplexMatrix out = *this;
    for (size_t i = 0; i < out.data_.size(); ++i) out.data_[i] += rhs.data_[i];
    return out;
}

ComplexMatrix ComplexMatrix::operator-(const ComplexMatrix& rhs) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
        throw std::invalid_argument("matrix difference: shapes differ");
    ComplexMatrix out = *this;
    for (size_t i = 0; i < out.data_.size(); ++i) out.data_[i] -= rhs.data_[i];
    return out;
}

ComplexMatrix ComplexMatrix::scaled(cxd factor) const {
    ComplexMatrix out = *this;
    for (auto& v : out.data_) v *= factor;
    return out;
}

double ComplexMatrix::frobenius_norm_sq() const {
    double s = 0.0;
    for (const auto& v : data_) s += std::norm(v);
    return s;
}

double ComplexMatrix::max_abs() const {
    double m = 0.0;
    for (const auto& v : data_) m = std::max(m, std::abs(v));
    return m;
}

bool ComplexMatrix::is_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](const cxd& v) {
        return std::isfinite(v.real()) && std::isfinite(v.imag());
    });
}

double ComplexMatrix::hermiticity_error() const {
    if (rows_ != cols_) return std::numeric_limits<double>::infinity();
    double e = 0.0;
    for (int r = 0; r < rows_; ++r)
        for (int c = r; c < cols_; ++c)
            e = std::max(e, std::abs((*this)(r, c) - std::conj((*this)(c, r))));
    return e;
}

void ComplexMatrix::scale_column(int c, cxd factor) {
    for (int r = 0; r < rows_; ++r) (*this)(r, c) *= factor;
}

ComplexMatrix random_gaussian_matrix(int rows, int cols, Rng& rng) {
    ComplexMatrix m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = rng.cgaussian();
    return m;
}

ComplexMatrix orthonormalize_columns(const ComplexMatrix& m) {
    if (m.cols() > m.rows())
        throw std::invalid_argument("orthonormalize_columns: more columns than rows");
    ComplexMatrix q = m;
    const int n = q.rows(), d = q.cols();
    for (int pass = 0; pass < 2; ++pass) {
        for (int c = 0; c < d; ++c) {
            for (int p = 0; p < c; ++p) {
                cxd dot{};
                for (int r = 0; r < n; ++r) dot += std::conj(q(r, p)) * q(r, c);
                for (int r = 0; r < n; ++r) q(r, c) -= dot * q(r, p);
            }
            double norm = 0.0;
            for (int r = 0; r < n; ++r) norm += std::norm(q(r, c));
            norm = std::sqrt(norm);
            if (norm < 1e-14)
                throw std::invalid_argument("orthonormalize_columns: rank-deficient input");
            for (int r = 0; r < n; ++r) q(r, c) /= norm;
        }
    }
    return q;
}

ComplexMatrix random_orthonormal_columns(int rows, int d, Rng& rng) {
    return orthonormalize_columns(random_gaussian_matrix(rows, d, rng));
}

HermitianEig hermitian_eig(const ComplexMatrix& q) {
    if (q.rows() != q.cols()) throw std::invalid_argument("hermitian_eig: matrix not square");
    if (!q.is_finite()) throw std::invalid_argument("hermitian_eig: non-finite entries");
    const double scale = std::max(1.0, q.max_abs());
    if (q.hermiticity_error() > 1e-10 * scale)
        throw std::invalid_argument("hermitian_eig: matrix not Hermitian");

    const int n = q.rows();
    ComplexMatrix a = q;
    ComplexMatrix v = ComplexMatrix::identity(n);

    auto offdiag_sq = [&]() {
        double s = 0.0;
        for (int r = 0; r < n; ++r)
            for (int c = r + 1; c < n; ++c) s += std::norm(a(r, c));
        return s;
    };

    const double tol = 1e-30 * scale * scale * n * n;
    for (int sweep = 0; sweep < 100 && offdiag_sq() > tol; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int qi = p + 1; qi < n; ++qi) {
                const cxd apq = a(p, qi);
                const double g = std::abs(apq);
                if (g <= 1e-300) continue;
                // Phase factor turns the 2x2 block real, then a classical
                // Jacobi rotation annihilates it. Combined unitary G:
                //   G[p][p]=c  G[p][q]=s  G[q][p]=-s*w  G[q][q]=c*w
                const cxd w = std::conj(apq) / g;
                const double app = a(p, p).real();
                const double aqq = a(qi, qi).real();
                const double tau = (aqq - app) / (2.0 * g);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const cxd sw = s * w;
                const cxd cw = c * w;
                for (int r = 0; r < n; ++r) {  // A <- A*G
                    const cxd arp = a(r, p), arq = a(r, qi);
                    a(r, p) = c * arp - sw * arq;
                    a(r, qi) = s * arp + cw * arq;
                }
                for (int col = 0; col < n; ++col) {  // A <- G^dagger * A
                    const cxd apc = a(p, col), aqc = a(qi, col);
                    a(p, col) = c * apc - std::conj(sw) * aqc;
                    a(qi, col) = s * apc + std::conj(cw) * aqc;
                }
                for (int r = 0; r < n; ++r) {  // V <- V*G
                    const cxd vrp = v(r, p), vrq = v(r, qi);
                    v(r, p) = c * vrp - sw * vrq;
                    v(r, qi) = s * vrp + cw * vrq;
                }
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> diag(n);
    for (int i = 0; i < n; ++i) diag[i] = a(i, i).real();
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return diag[i] < diag[j]; });

    HermitianEig out;
    out.eigenvalues.resize(n);
    out.eigenvectors = ComplexMatrix(n, n);
    for (int k = 0; k < n; ++k) {
        out.eigenvalues[k] = diag[order[k]];
        for (int r = 0; r < n; ++r) out.eigenvectors(r, k) = v(r, order[k]);
    }
    return out;
}

ComplexMatrix smallest_eigvecs(const ComplexMatrix& q, int d) {
    if (d < 1 || d > q.rows()) throw std::invalid_argument("smallest_eigvecs: bad column count");
    const HermitianEig eig = hermitian_eig(q);
    ComplexMatrix out(q.rows(), d);
    for (int k = 0; k < d; ++k)
        for (int r = 0; r < q.rows(); ++r) out(r, k) = eig.eigenvectors(r, k);
    return out;
}

std::vector<double> singular_values(const ComplexMatrix& m) {
    const ComplexMatrix gram = m.adjoint() * m;
    HermitianEig eig = hermitian_eig(gram);
    std::vector<double> sv(eig.eigenvalues.size());
    for (size_t i = 0; i < sv.size(); ++i) {
        const double ev = eig.eigenvalues[eig.eigenvalues.size() - 1 - i];
        sv[i] = std::sqrt(std::max(0.0, ev));
    }
    return sv;
}

}  // namespace oia
