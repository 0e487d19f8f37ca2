// First-order correctors, flux correctors, and large-scale diagnostics.
#pragma once

#include <vector>

#include "homolab/field.hpp"
#include "homolab/torus.hpp"

namespace homolab {

/// Periodic correctors phi_e and flux correctors S_e on a torus of side L.
///
/// phi[j]         : mean-zero corrector for direction e_j (per site)
/// grad[j]        : edge field e_j + D+ phi_j  (the tilted gradient X_j)
/// flux[j]        : edge field a X_j
/// S[j]           : flux corrector components S_{e_j, il}, skew in (i,l),
///                  stored for i < l at sites (S[j][i][l])
/// ahom_per       : periodic homogenized matrix (mean flux = ahom_per e_j)
struct CorrectorSet {
    Grid torus;
    int64_t L = 0;
    int cells_per_unit = 1;
    std::vector<ScalarField> phi;     // d entries
    std::vector<VectorField> tilted;  // d entries, X_j = e_j + D+ phi_j
    std::vector<VectorField> flux;    // d entries, a X_j
    SymMat ahom_per;
    // S[j] holds d*d site fields; entry (i,l) with i<l carries S_{e_j,il},
    // the (l,i) entry is its negative. Diagonal entries are zero.
    std::vector<std::vector<ScalarField>> S;
    std::vector<int> iterations;
    std::vector<double> residuals;

    int dim() const { return torus.dim; }
    const ScalarField& s_component(int e, int i, int l) const {
        return S[static_cast<size_t>(e)][static_cast<size_t>(i * torus.dim + l)];
    }
};

struct CorrectorOptions {
    int cells_per_unit = 2;
    SolverOptions solver{};
    bool compute_flux_correctors = true;
};

CorrectorSet compute_correctors(const CoefficientSample& field, int64_t L,
                                const CorrectorOptions& opts = {});

/// Max relative residual of a(e + grad phi_e) - ahom_per e = div S_e over
/// directions e (exact-grid identity; should sit at solver precision).
double flux_identity_residual(const CorrectorSet& cs);

/// Periodization monitor: relative L2 gap per direction between the
/// torus-L corrector gradient (periodically extended) and the torus-2L one,
/// measured over the 2L torus of the same field sample.
std::vector<double> corrector_doubling_gap(const CoefficientSample& field, int64_t L,
                                           const CorrectorOptions& opts = {});

struct DecayDiagnostic {
    std::vector<double> scales;
    std::vector<double> rms;  // RMS over samples of the masked average
    double slope = 0.0;       // fitted d log rms / d log r
    double intercept = 0.0;
};

struct HeatDecayReport {
    DecayDiagnostic gradient;
    DecayDiagnostic flux;
    DecayDiagnostic energy;
    SymMat ahom_pooled;
};

/// Heat-kernel averages of corrector gradient, flux and energy density over
/// M independent samples; RMS per scale and log-log slopes.
HeatDecayReport heat_average_decay(const FieldSpec& spec, int direction,
                                   const std::vector<double>& scales, int n_samples,
                                   int64_t L, uint64_t seed,
                                   const CorrectorOptions& opts = {});

struct GrowthTable {
    std::vector<double> scales;
    std::vector<double> values;  // || phi - (phi * Phi_r)(0) ||_L2(B_r)
    double slope_vs_sqrtlog = 0.0;  // d=2 regression against sqrt(log r)
};

GrowthTable sublinearity_profile(const CorrectorSet& cs, int direction,
                                 const std::vector<double>& scales);

struct LipschitzProfile {
    std::vector<double> radii;
    std::vector<double> values;  // (1/r) || u - (u)_{B_r} ||_L2(B_r)
    double minimal_scale = 0.0;  // smallest r with values <= C0 * value at R
};

/// Dirichlet solve on the box circumscribing B_R with random smooth boundary
/// data; oscillation profile over dyadic balls and empirical minimal scale.
LipschitzProfile lipschitz_profile(const CoefficientSample& field, double R,
                                   uint64_t data_seed, double c0 = 8.0,
                                   const CorrectorOptions& opts = {});

}  // namespace homolab
