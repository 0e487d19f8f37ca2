// White noise by the dyadic wavelet construction and the gradient Gaussian
// free field via the Helmholtz projection on a torus.
#pragma once

#include <cstdint>
#include <vector>

#include "homolab/grid.hpp"
#include "homolab/rng.hpp"
#include "homolab/smallmat.hpp"
#include "homolab/torus.hpp"

namespace homolab {

/// Test function that is piecewise constant on dyadic cells of side
/// 2^-level over the integer box [lo, hi) in cell units.
struct DyadicFn {
    int dim = 1;
    int level = 0;
    std::array<int64_t, kMaxDim> lo{0, 0, 0};
    std::array<int64_t, kMaxDim> hi{1, 1, 1};
    std::vector<double> values;  // row-major over the box

    static DyadicFn indicator_unit_box(int dim);
    /// Indicator of a single dyadic cell z + D_level.
    static DyadicFn cell_indicator(int dim, int level, const std::array<int64_t, kMaxDim>& z);
    /// Indicator of (0, side)^d with side an integer, at level 0.
    static DyadicFn box_indicator(int dim, int64_t side);

    int64_t num_cells() const;
    double cell_volume() const;
    double l2_norm_sq() const;
};

/// Finite-level white noise W_n with deterministic coefficients drawn from a
/// hashed seed. Scalar (n_comp = 1) or vector with covariance Q.
class WhiteNoise {
   public:
    WhiteNoise(int dim, int level, double sigma2, uint64_t seed);
    WhiteNoise(int dim, int level, const SymMat& Q, uint64_t seed);

    int dim() const { return dim_; }
    int level() const { return level_; }

    /// W_n(f) for scalar noise.
    double evaluate(const DyadicFn& f) const;
    /// W_n(f) for vector noise, f given per component.
    double evaluate_vec(const std::vector<DyadicFn>& f) const;

    /// Exact Var W_n(f): sum of squared basis coefficients (deterministic).
    double variance_exact(const DyadicFn& f) const;
    /// The cell-average variance formula at resolution n (deterministic).
    double variance_cell_formula(const DyadicFn& f) const;
    /// Variance of W_{n+1}(f) - W_n(f): the level-n detail tail.
    double refinement_variance(const DyadicFn& f) const;

   private:
    int dim_ = 1;
    int level_ = 0;
    int ncomp_ = 1;
    double sigma2_ = 1.0;
    SymMat q_sqrt_;
    HashKey key_;

    template <typename Accum>
    void for_each_coefficient(const DyadicFn& f, int max_level, Accum&& acc) const;
};

struct ScalingReport {
    std::vector<double> lambdas;
    std::vector<double> sd;  // empirical sd of lambda^{-d} W(f(./lambda))
    double slope = 0.0;      // fitted log sd / log lambda (expect -d/2)
};

ScalingReport scaling_check(int dim, int level, const std::vector<double>& lambdas,
                            int n_seeds, uint64_t seed);

/// Gradient GFF machinery on a periodic torus with matrices ahom and Q.
class GradientGff {
   public:
    GradientGff(const Grid& torus, const SymMat& ahom, const SymMat& Q);

    const Grid& torus() const { return torus_; }

    /// Edge white-noise realization: per cell, Q^{1/2} normals / h^{d/2}.
    VectorField sample_noise(uint64_t seed) const;

    /// P_ahom F: gradient part of F in the ahom-weighted Helmholtz split.
    VectorField project(const VectorField& F) const;

    /// grad Psi (F) = <W, P F> for a given noise realization.
    double evaluate(const VectorField& noise, const VectorField& F) const;

    /// Deterministic Var grad Psi(F) = int (P F) . Q (P F).
    double variance_formula(const VectorField& F) const;

    /// Staircase vector potential: edge field F with div F = f (mean-zero f).
    VectorField divergence_potential(const ScalarField& f) const;

    /// Psi(f) := -grad Psi(F) with F from the staircase construction.
    double potential_from_gradient(const VectorField& noise, const ScalarField& f) const;

   private:
    Grid torus_;
    SymMat ahom_;
    SymMat q_;
    SymMat q_sqrt_;
    std::shared_ptr<TorusFft> fft_;
};

}  // namespace homolab
