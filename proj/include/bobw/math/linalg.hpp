#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

// Minimal dense linear algebra for desk-scale problems: a row-major matrix,
// column-pivoted Householder QR, rank, and nullspace extraction.

namespace bobw {

struct Mat {
    int rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, fill) {}

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

    Mat transposed() const {
        Mat t(cols, rows);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
        return t;
    }
};

inline Mat matmul(const Mat& x, const Mat& y) {
    if (x.cols != y.rows) throw std::invalid_argument("matmul: shape mismatch");
    Mat z(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int k = 0; k < x.cols; ++k) {
            const double v = x(i, k);
            if (v == 0.0) continue;
            for (int j = 0; j < y.cols; ++j) z(i, j) += v * y(k, j);
        }
    return z;
}

namespace detail {

// Column-pivoted Householder QR. On return `q` is m x m orthogonal, `r`
// upper-trapezoidal m x n, `perm` the column permutation; rank is detected
// from the diagonal of r.
struct Qr {
    Mat q, r;
    std::vector<int> perm;
    int rank = 0;
};

inline Qr qr_decompose(Mat m_in, double rel_tol = 1e-10) {
    const int m = m_in.rows, n = m_in.cols;
    Qr out;
    out.r = m_in;
    out.q = Mat(m, m);
    for (int i = 0; i < m; ++i) out.q(i, i) = 1.0;
    out.perm.resize(n);
    for (int j = 0; j < n; ++j) out.perm[j] = j;

    std::vector<double> colnorm(n, 0.0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i) colnorm[j] += out.r(i, j) * out.r(i, j);

    const int steps = std::min(m, n);
    double first_pivot = 0.0;
    for (int k = 0; k < steps; ++k) {
        // pivot: column with the largest remaining norm
        int piv = k;
        double best = -1.0;
        for (int j = k; j < n; ++j) {
            double s = 0.0;
            for (int i = k; i < m; ++i) s += out.r(i, j) * out.r(i, j);
            if (s > best) {
                best = s;
                piv = j;
            }
        }
        if (piv != k) {
            for (int i = 0; i < m; ++i) std::swap(out.r(i, k), out.r(i, piv));
            std::swap(out.perm[k], out.perm[piv]);
        }
        double norm = std::sqrt(std::max(0.0, best));
        if (k == 0) first_pivot = norm;
        if (norm <= rel_tol * std::max(1.0, first_pivot)) break;
        out.rank = k + 1;

        // Householder vector for column k
        std::vector<double> v(m - k, 0.0);
        double alpha = out.r(k, k) >= 0 ? -norm : norm;
        v[0] = out.r(k, k) - alpha;
        for (int i = k + 1; i < m; ++i) v[i - k] = out.r(i, k);
        double vnorm2 = 0.0;
        for (double x : v) vnorm2 += x * x;
        if (vnorm2 > 0.0) {
            for (int j = k; j < n; ++j) {
                double dot = 0.0;
                for (int i = k; i < m; ++i) dot += v[i - k] * out.r(i, j);
                const double f = 2.0 * dot / vnorm2;
                for (int i = k; i < m; ++i) out.r(i, j) -= f * v[i - k];
            }
            for (int j = 0; j < m; ++j) {
                double dot = 0.0;
                for (int i = k; i < m; ++i) dot += v[i - k] * out.q(j, i);
                const double f = 2.0 * dot / vnorm2;
                for (int i = k; i < m; ++i) out.q(j, i) -= f * v[i - k];
            }
        }
        out.r(k, k) = alpha;
        for (int i = k + 1; i < m; ++i) out.r(i, k) = 0.0;
    }
    return out;
}

} // namespace detail

inline int rank(const Mat& a, double rel_tol = 1e-10) {
    if (a.rows == 0 || a.cols == 0) return 0;
    return detail::qr_decompose(a, rel_tol).rank;
}

// Orthonormal basis of {x : A x = 0}, as a list of length-n vectors.
// Computed from the QR factorization of A^T: the trailing columns of Q span
// the orthogonal complement of range(A^T).
inline std::vector<std::vector<double>> nullspace(const Mat& a, double rel_tol = 1e-10) {
    const int n = a.cols;
    std::vector<std::vector<double>> basis;
    if (n == 0) return basis;
    if (a.rows == 0) {
        for (int j = 0; j < n; ++j) {
            std::vector<double> e(n, 0.0);
            e[j] = 1.0;
            basis.push_back(std::move(e));
        }
        return basis;
    }
    auto qr = detail::qr_decompose(a.transposed(), rel_tol);
    for (int j = qr.rank; j < n; ++j) {
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i) v[i] = qr.q(i, j);
        basis.push_back(std::move(v));
    }
    return basis;
}

} // namespace bobw
