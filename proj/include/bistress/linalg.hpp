#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "bistress/errors.hpp"

namespace bistress {

using Point = std::vector<double>;

// Small dense row-major matrix of doubles. Sizes in this project never
// exceed a handful of rows, so everything below is plain O(n^3) code.
struct Mat {
    int rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }
};

inline double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

// LU determinant with partial pivoting.
inline double det(Mat m) {
    if (m.rows != m.cols) throw DimensionError("det: matrix not square");
    int n = m.rows;
    double d = 1.0;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::fabs(m.at(i, k)) > std::fabs(m.at(piv, k))) piv = i;
        if (m.at(piv, k) == 0.0) return 0.0;
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(m.at(piv, j), m.at(k, j));
            d = -d;
        }
        d *= m.at(k, k);
        for (int i = k + 1; i < n; ++i) {
            double f = m.at(i, k) / m.at(k, k);
            for (int j = k; j < n; ++j) m.at(i, j) -= f * m.at(k, j);
        }
    }
    return d;
}

inline Mat inverse(Mat m) {
    if (m.rows != m.cols) throw DimensionError("inverse: matrix not square");
    int n = m.rows;
    Mat inv = Mat::identity(n);
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::fabs(m.at(i, k)) > std::fabs(m.at(piv, k))) piv = i;
        if (m.at(piv, k) == 0.0) throw DegenerateMetricError("inverse: singular matrix");
        if (piv != k)
            for (int j = 0; j < n; ++j) {
                std::swap(m.at(piv, j), m.at(k, j));
                std::swap(inv.at(piv, j), inv.at(k, j));
            }
        double p = m.at(k, k);
        for (int j = 0; j < n; ++j) {
            m.at(k, j) /= p;
            inv.at(k, j) /= p;
        }
        for (int i = 0; i < n; ++i) {
            if (i == k) continue;
            double f = m.at(i, k);
            if (f == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                m.at(i, j) -= f * m.at(k, j);
                inv.at(i, j) -= f * inv.at(k, j);
            }
        }
    }
    return inv;
}

inline int rank(Mat m, double tol = 1e-10) {
    int r = 0;
    int row = 0;
    for (int col = 0; col < m.cols && row < m.rows; ++col) {
        int piv = row;
        for (int i = row + 1; i < m.rows; ++i)
            if (std::fabs(m.at(i, col)) > std::fabs(m.at(piv, col))) piv = i;
        if (std::fabs(m.at(piv, col)) <= tol) continue;
        if (piv != row)
            for (int j = 0; j < m.cols; ++j) std::swap(m.at(piv, j), m.at(row, j));
        for (int i = row + 1; i < m.rows; ++i) {
            double f = m.at(i, col) / m.at(row, col);
            for (int j = col; j < m.cols; ++j) m.at(i, j) -= f * m.at(row, j);
        }
        ++row;
        ++r;
    }
    return r;
}

// Smallest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
inline double min_eigenvalue_sym(Mat m) {
    int n = m.rows;
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += m.at(i, j) * m.at(i, j);
        if (off < 1e-26) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                double apq = m.at(p, q);
                if (std::fabs(apq) < 1e-300) continue;
                double theta = (m.at(q, q) - m.at(p, p)) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = m.at(k, p), akq = m.at(k, q);
                    m.at(k, p) = c * akp - s * akq;
                    m.at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = m.at(p, k), aqk = m.at(q, k);
                    m.at(p, k) = c * apk - s * aqk;
                    m.at(q, k) = s * apk + c * aqk;
                }
            }
    }
    double lo = m.at(0, 0);
    for (int i = 1; i < n; ++i) lo = std::min(lo, m.at(i, i));
    return lo;
}

// Deterministic reduction: summing in a fixed pairwise tree makes results
// independent of how the per-element work was scheduled across threads.
inline double pairwise_sum(std::span<const double> v) {
    if (v.empty()) return 0.0;
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    std::size_t half = v.size() / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

}  // namespace bistress
