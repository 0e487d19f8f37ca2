// Independent oracles used by the test suites. These deliberately avoid the
// library's solver and spectral paths: closed forms, cumulative sums, direct
// stencils and quadrature only.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

// Exact solution of -(a u')' = 0 on [0, n*h] with u(0)=0, u(end)=p*len for
// piecewise constant a per cell: u(x_k) = m^{-1} * sum_{j<k} h / a_j with
// m = sum_j h / a_j / (p*len). Returns nodal values.
inline std::vector<double> exact_1d_dirichlet(const std::vector<double>& a_cells, double h,
                                              double p) {
    size_t n = a_cells.size();
    std::vector<double> u(n + 1, 0.0);
    double total = 0;
    for (size_t j = 0; j < n; ++j) total += h / a_cells[j];
    double len = h * static_cast<double>(n);
    double flux = p * len / total;  // constant flux a u' = flux
    for (size_t j = 0; j < n; ++j) u[j + 1] = u[j] + flux * h / a_cells[j];
    return u;
}

// Energy (per unit volume) of the exact 1D minimizer: 1/2 * harm * p^2 with
// harm the harmonic mean of the sampled cells.
inline double exact_1d_nu(const std::vector<double>& a_cells, double p) {
    double inv = 0;
    for (double a : a_cells) inv += 1.0 / a;
    inv /= static_cast<double>(a_cells.size());
    return 0.5 * (1.0 / inv) * p * p;
}

// nu* value for the exact 1D maximizer: 1/2 * (arithmetic mean of 1/a) * q^2.
// (The maximizer has constant flux q; value = q^2/2 * mean(1/a).)
inline double exact_1d_nu_star(const std::vector<double>& a_cells, double q) {
    double inv = 0;
    for (double a : a_cells) inv += 1.0 / a;
    inv /= static_cast<double>(a_cells.size());
    return 0.5 * inv * q * q;
}

// Symbol of the staggered constant-coefficient operator -D-.(c D+ u) for a
// scalar c: c * sum_a (2 - 2 cos theta_a) / h^2.
inline double staggered_symbol(const std::vector<double>& thetas, double c, double h) {
    double s = 0;
    for (double th : thetas) s += 2.0 - 2.0 * std::cos(th);
    return c * s / (h * h);
}

// Plain trapezoid-free fine quadrature of int_0^1 t^{alpha-1} g(t) dt.
inline double fine_quadrature(double alpha, const std::function<double(double)>& g, int n = 400000) {
    // substitution t = exp(s) on [log(1e-12), 0]
    double s_lo = std::log(1e-12);
    double acc = 0;
    for (int i = 0; i < n; ++i) {
        double s = s_lo * (1.0 - (i + 0.5) / n);
        double t = std::exp(s);
        acc += std::pow(t, alpha) * g(t);
    }
    acc *= -s_lo / n;
    // remaining mass below 1e-12
    acc += g(0.0) * std::pow(1e-12, alpha) / alpha;
    return acc;
}

// Least squares slope of y against x.
inline double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = static_cast<int>(x.size());
    for (int i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracles
