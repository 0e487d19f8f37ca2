// Small dense vectors and symmetric matrices for spatial dimensions 1..3.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace homolab {

constexpr int kMaxDim = 3;

/// Spatial vector with runtime dimension d <= 3. Unused entries stay zero.
struct Vec {
    int dim = 0;
    std::array<double, kMaxDim> v{0.0, 0.0, 0.0};

    Vec() = default;
    explicit Vec(int d) : dim(d) {}
    Vec(int d, std::initializer_list<double> xs) : dim(d) {
        int i = 0;
        for (double x : xs) {
            if (i >= d) break;
            v[i++] = x;
        }
    }
    static Vec unit(int d, int axis) {
        Vec e(d);
        e.v[axis] = 1.0;
        return e;
    }
    double& operator[](int i) { return v[i]; }
    double operator[](int i) const { return v[i]; }

    Vec operator+(const Vec& o) const {
        Vec r(dim);
        for (int i = 0; i < dim; ++i) r.v[i] = v[i] + o.v[i];
        return r;
    }
    Vec operator-(const Vec& o) const {
        Vec r(dim);
        for (int i = 0; i < dim; ++i) r.v[i] = v[i] - o.v[i];
        return r;
    }
    Vec operator*(double s) const {
        Vec r(dim);
        for (int i = 0; i < dim; ++i) r.v[i] = v[i] * s;
        return r;
    }
    double dot(const Vec& o) const {
        double s = 0;
        for (int i = 0; i < dim; ++i) s += v[i] * o.v[i];
        return s;
    }
    double norm() const { return std::sqrt(dot(*this)); }
};

/// Symmetric d x d matrix, d <= 3, stored as the full square for simplicity.
struct SymMat {
    int dim = 0;
    std::array<double, kMaxDim * kMaxDim> m{};  // row-major

    SymMat() = default;
    explicit SymMat(int d) : dim(d) { m.fill(0.0); }

    static SymMat identity(int d, double scale = 1.0) {
        SymMat a(d);
        for (int i = 0; i < d; ++i) a(i, i) = scale;
        return a;
    }

    double& operator()(int i, int j) { return m[i * kMaxDim + j]; }
    double operator()(int i, int j) const { return m[i * kMaxDim + j]; }

    SymMat operator+(const SymMat& o) const {
        SymMat r(dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) r(i, j) = (*this)(i, j) + o(i, j);
        return r;
    }
    SymMat operator-(const SymMat& o) const {
        SymMat r(dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) r(i, j) = (*this)(i, j) - o(i, j);
        return r;
    }
    SymMat operator*(double s) const {
        SymMat r(dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) r(i, j) = (*this)(i, j) * s;
        return r;
    }

    Vec apply(const Vec& x) const {
        Vec r(dim);
        for (int i = 0; i < dim; ++i) {
            double s = 0;
            for (int j = 0; j < dim; ++j) s += (*this)(i, j) * x[j];
            r[i] = s;
        }
        return r;
    }

    double quad(const Vec& x) const { return x.dot(apply(x)); }

    double frobenius() const {
        double s = 0;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) s += (*this)(i, j) * (*this)(i, j);
        return std::sqrt(s);
    }

    double max_abs_asymmetry() const {
        double s = 0;
        for (int i = 0; i < dim; ++i)
            for (int j = i + 1; j < dim; ++j)
                s = std::max(s, std::abs((*this)(i, j) - (*this)(j, i)));
        return s;
    }

    SymMat symmetrized() const {
        SymMat r(dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) r(i, j) = 0.5 * ((*this)(i, j) + (*this)(j, i));
        return r;
    }

    /// Eigenvalues in ascending order (Jacobi sweeps; exact enough for d<=3).
    std::array<double, kMaxDim> eigenvalues() const;

    SymMat inverse() const;
    SymMat sqrt_spd() const;  // symmetric square root, requires PSD
    double det() const;
};

/// Solve a small (<=3x3) symmetric linear system by Gaussian elimination
/// with partial pivoting. Throws on (numerically) singular systems.
Vec solve_small(const SymMat& a, const Vec& b);

/// Comparison in the quadratic-form (Loewner) order: lo*I <= a <= hi*I.
bool eigen_bounds_hold(const SymMat& a, double lo, double hi, double slack = 0.0);

}  // namespace homolab
