// FFTW-backed spectral kernels: torus transforms with staggered difference
// symbols, constant-coefficient Poisson solves, and fast constant-coefficient
// preconditioners for box problems.
#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "homolab/grid.hpp"
#include "homolab/smallmat.hpp"

namespace homolab {

/// Full complex-to-complex FFT over the cells of a periodic grid.
/// Mode indices share the cell layout; index m along axis a corresponds to
/// the angle theta = 2 pi m / n_a (m interpreted mod n_a).
class TorusFft {
   public:
    explicit TorusFft(const Grid& g);
    ~TorusFft();
    TorusFft(const TorusFft&) = delete;
    TorusFft& operator=(const TorusFft&) = delete;

    const Grid& grid() const { return grid_; }
    int64_t num_modes() const { return grid_.num_cells(); }

    void forward(const double* in, std::complex<double>* out) const;
    /// Inverse transform including the 1/N normalization.
    void backward(const std::complex<double>* in, double* out) const;

    /// theta_a = 2 pi m_a / n_a for the mode with flat index idx.
    std::array<double, kMaxDim> angles(int64_t idx) const;
    /// Continuum frequency 2 pi m_signed / L_a.
    std::array<double, kMaxDim> continuum_freq(int64_t idx) const;
    /// Forward-difference symbol (e^{i theta_a} - 1)/h for axis a.
    static std::complex<double> d_plus(double theta, double h);

   private:
    Grid grid_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Smooth periodic cell data by the heat kernel: multiply the DFT by
/// exp(-r^2 |kappa|^2) with continuum frequencies kappa.
void spectral_gaussian_smooth(const Grid& g, const std::vector<double>& in, double r,
                              std::vector<double>& out);

/// Exact inverse of the staggered constant-coefficient operator
/// -D^- . (c D^+ u) on the torus. Mean-zero solutions; rhs must be mean zero.
class SpectralPoisson {
   public:
    SpectralPoisson(const Grid& g, const SymMat& c);
    /// u with -div(c grad u) = rhs, mean(u) = 0.
    void solve(const double* rhs, double* u) const;
    /// Forward action (useful for building discrete right-hand sides).
    void apply(const double* u, double* out) const;
    /// Discrete symbol at mode idx (real, nonnegative).
    double symbol(int64_t idx) const { return symbol_[static_cast<size_t>(idx)]; }

   private:
    std::shared_ptr<TorusFft> fft_;
    std::vector<double> symbol_;
};

/// Exact inverse of the constant-coefficient finite-difference Laplacian on
/// box nodes, used as a CG preconditioner. DirichletInterior acts on interior
/// nodes (DST-I); NeumannNodes acts on all nodes with the zero mode projected
/// out (DCT-II/III pair).
class BoxFdInverse {
   public:
    enum class Kind { DirichletInterior, NeumannNodes };

    BoxFdInverse(const Grid& g, Kind kind, double coeff_scale);
    ~BoxFdInverse();
    BoxFdInverse(const BoxFdInverse&) = delete;
    BoxFdInverse& operator=(const BoxFdInverse&) = delete;

    int64_t size() const { return size_; }
    void apply_inverse(const double* in, double* out) const;

   private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int64_t size_ = 0;
};

}  // namespace homolab
