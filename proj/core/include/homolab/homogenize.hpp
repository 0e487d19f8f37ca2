// Monte Carlo estimation of the homogenized matrix, bracketing bounds,
// closed-form checks, and empirical convergence-rate fits.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "homolab/energy.hpp"
#include "homolab/field.hpp"

namespace homolab {

struct HomogenizedEstimate {
    int level = 0;
    int samples = 0;
    SymMat ahom;           // mean of the nu-derived a_U over samples
    SymMat bhom_inv;       // inverse of the mean nu*-derived b_U
    SymMat stderr_ahom;    // per-entry standard error of ahom
    SymMat harmonic_mean;  // Voigt-Reiss lower bracket (Monte Carlo)
    SymMat arithmetic_mean;
    SymMat stderr_harmonic;
    SymMat stderr_arithmetic;
    double route_gap = 0.0;  // Frobenius gap between ahom and bhom_inv
    int failed_samples = 0;
};

struct EstimateOptions {
    EnergyOptions energy{};
    int bracket_samples = 256;  // unit cells per sample for the VR brackets
};

HomogenizedEstimate estimate_ahom(const FieldSpec& spec, int level, int samples, uint64_t seed,
                                  const EstimateOptions& opts = {});

struct VoigtReissReport {
    SymMat harmonic;
    SymMat arithmetic;
    SymMat stderr_harmonic;
    SymMat stderr_arithmetic;
};

/// Monte Carlo harmonic and arithmetic means of a over unit cells.
VoigtReissReport voigt_reiss(const FieldSpec& spec, int samples, uint64_t seed,
                             int quad_per_cell = 4);

struct DynkinReport {
    SymMat ahom;
    SymMat stderr_ahom;
    double target = 0.0;      // sqrt(alpha beta)
    double deviation = 0.0;   // max |ahom_ii - target| over diagonal
    double offdiag_max = 0.0;
    double offdiag_stderr = 0.0;
};

/// d=2 scalar checkerboard {alpha I, beta I} vs the geometric-mean formula.
DynkinReport dynkin_check(double alpha, double beta, double lambda, int level, int samples,
                          uint64_t seed, const EstimateOptions& opts = {});

struct RateFit {
    std::vector<int> levels;
    std::vector<double> means;      // E[nu(cube_n, p)]
    std::vector<double> variances;  // Var[nu(cube_n, p)]
    double nu_bar_proxy = 0.0;      // largest-level mean
    double alpha = 0.0;             // gap ~ C 3^{-n alpha}
    double alpha_constant = 0.0;
    double gap_fit_r2 = 0.0;
    double variance_slope = 0.0;    // d log3 Var / dn  (CLT: -d)
    bool degenerate = false;        // gaps at noise floor (constant law)
};

RateFit rate_fit(const FieldSpec& spec, int level_lo, int level_hi, int samples, const Vec& p,
                 uint64_t seed, const EnergyOptions& opts = {});

}  // namespace homolab
