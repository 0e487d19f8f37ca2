#include "homolab/smallmat.hpp"

#include <algorithm>

namespace homolab {

std::array<double, kMaxDim> SymMat::eigenvalues() const {
    std::array<double, kMaxDim> ev{0.0, 0.0, 0.0};
    if (dim == 1) {
        ev[0] = (*this)(0, 0);
        return ev;
    }
    // Cyclic Jacobi on a local copy; converges fast for d <= 3.
    double a[kMaxDim][kMaxDim];
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a[i][j] = 0.5 * ((*this)(i, j) + (*this)(j, i));
    for (int sweep = 0; sweep < 32; ++sweep) {
        double off = 0;
        for (int i = 0; i < dim; ++i)
            for (int j = i + 1; j < dim; ++j) off += a[i][j] * a[i][j];
        if (off < 1e-30) break;
        for (int p = 0; p < dim; ++p) {
            for (int q = p + 1; q < dim; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int k = 0; k < dim; ++k) {
                    double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < dim; ++k) {
                    double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    for (int i = 0; i < dim; ++i) ev[i] = a[i][i];
    std::sort(ev.begin(), ev.begin() + dim);
    return ev;
}

double SymMat::det() const {
    if (dim == 1) return (*this)(0, 0);
    if (dim == 2) return (*this)(0, 0) * (*this)(1, 1) - (*this)(0, 1) * (*this)(1, 0);
    const SymMat& a = *this;
    return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
           a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
           a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

SymMat SymMat::inverse() const {
    SymMat r(dim);
    double d = det();
    if (std::abs(d) < 1e-300) throw std::runtime_error("SymMat::inverse: singular matrix");
    if (dim == 1) {
        r(0, 0) = 1.0 / d;
    } else if (dim == 2) {
        const SymMat& a = *this;
        r(0, 0) = a(1, 1) / d;
        r(1, 1) = a(0, 0) / d;
        r(0, 1) = -a(0, 1) / d;
        r(1, 0) = -a(1, 0) / d;
    } else {
        const SymMat& a = *this;
        r(0, 0) = (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) / d;
        r(0, 1) = (a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2)) / d;
        r(0, 2) = (a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1)) / d;
        r(1, 0) = (a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2)) / d;
        r(1, 1) = (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) / d;
        r(1, 2) = (a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2)) / d;
        r(2, 0) = (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)) / d;
        r(2, 1) = (a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1)) / d;
        r(2, 2) = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) / d;
    }
    return r;
}

SymMat SymMat::sqrt_spd() const {
    // Eigendecomposition via Jacobi with accumulated rotations.
    double a[kMaxDim][kMaxDim], v[kMaxDim][kMaxDim] = {};
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) a[i][j] = 0.5 * ((*this)(i, j) + (*this)(j, i));
        v[i][i] = 1.0;
    }
    for (int sweep = 0; sweep < 48; ++sweep) {
        double off = 0;
        for (int i = 0; i < dim; ++i)
            for (int j = i + 1; j < dim; ++j) off += a[i][j] * a[i][j];
        if (off < 1e-32) break;
        for (int p = 0; p < dim; ++p) {
            for (int q = p + 1; q < dim; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int k = 0; k < dim; ++k) {
                    double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < dim; ++k) {
                    double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (int k = 0; k < dim; ++k) {
                    double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    SymMat r(dim);
    for (int i = 0; i < dim; ++i) {
        double lam = a[i][i];
        if (lam < -1e-12) throw std::runtime_error("SymMat::sqrt_spd: negative eigenvalue");
        double s = std::sqrt(std::max(lam, 0.0));
        for (int j = 0; j < dim; ++j)
            for (int k = 0; k < dim; ++k) r(j, k) += s * v[j][i] * v[k][i];
    }
    return r;
}

Vec solve_small(const SymMat& a, const Vec& b) {
    int n = a.dim;
    double m[kMaxDim][kMaxDim + 1];
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) m[i][j] = a(i, j);
        m[i][n] = b[i];
    }
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
        if (std::abs(m[piv][c]) < 1e-300)
            throw std::runtime_error("solve_small: singular system");
        if (piv != c)
            for (int j = 0; j <= n; ++j) std::swap(m[piv][j], m[c][j]);
        for (int r = c + 1; r < n; ++r) {
            double f = m[r][c] / m[c][c];
            for (int j = c; j <= n; ++j) m[r][j] -= f * m[c][j];
        }
    }
    Vec x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = m[i][n];
        for (int j = i + 1; j < n; ++j) s -= m[i][j] * x[j];
        x[i] = s / m[i][i];
    }
    return x;
}

bool eigen_bounds_hold(const SymMat& a, double lo, double hi, double slack) {
    auto ev = a.eigenvalues();
    return ev[0] >= lo - slack && ev[a.dim - 1] <= hi + slack;
}

}  // namespace homolab
