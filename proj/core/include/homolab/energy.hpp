// Subadditive energy quantities nu, nu*, J and their structural identities.
#pragma once

#include <optional>
#include <vector>

#include "homolab/corrector_fwd.hpp"
#include "homolab/field.hpp"
#include "homolab/solver.hpp"
#include "homolab/torus.hpp"

namespace homolab {

struct EnergyReport {
    TriadicCube cube;
    Vec p, q;
    double nu = 0.0;
    double nu_star = 0.0;
    double j = 0.0;  // nu + nu* - p.q
    Vec grad_avg_dirichlet;  // mean gradient of the nu minimizer (= p exactly)
    Vec flux_avg_dirichlet;  // mean flux of the nu minimizer
    Vec grad_avg_neumann;    // mean gradient of the nu* maximizer
    Vec flux_avg_neumann;    // mean flux of the nu* maximizer
    int iterations_nu = 0;
    int iterations_nu_star = 0;
    double residual_nu = 0.0;
    double residual_nu_star = 0.0;
};

struct QuadraticFormPair {
    SymMat a_U;         // nu(U,p) = 1/2 p . a_U p
    SymMat b_U;         // nu*(U,q) = 1/2 q . b_U q
    double residual_a = 0.0;  // reconstruction residual on probe directions
    double residual_b = 0.0;
};

/// Grid resolution context for energy computations.
struct EnergyOptions {
    int cells_per_unit = 2;
    SolverOptions solver{};
};

double nu(const CoefficientSample& field, const TriadicCube& cube, const Vec& p,
          const EnergyOptions& opts = {});

double nu_star(const CoefficientSample& field, const TriadicCube& cube, const Vec& q,
               const EnergyOptions& opts = {});

EnergyReport j_quantity(const CoefficientSample& field, const TriadicCube& cube, const Vec& p,
                        const Vec& q, const EnergyOptions& opts = {});

/// Evaluates nu (resp. nu*) on the polarization directions {e_i, e_i +- e_j}
/// and reconstructs the quadratic forms. Throws if the reconstruction
/// residual exceeds 1e-8 relative (non-quadratic energies signal a bug).
QuadraticFormPair recover_quadratic_forms(const CoefficientSample& field,
                                          const TriadicCube& cube,
                                          const EnergyOptions& opts = {});

struct SubadditivityReport {
    double slack_nu = 0.0;  // sum (|U_i|/|U|) nu(U_i,p) - nu(U,p)  (>= 0)
    double slack_j = 0.0;   // same for J
};

/// Subadditivity over the partition of `cube` into its level-(m-1) children.
SubadditivityReport subadditivity_check(const CoefficientSample& field, const TriadicCube& cube,
                                        const Vec& p, const Vec& q,
                                        const EnergyOptions& opts = {});

struct DerivativeResiduals {
    double dJ_dp = 0.0;        // |FD gradient of J in p + mean flux of maximizer|
    double dJ_dq = 0.0;        // |FD gradient of J in q - mean gradient of maximizer|
    double flux_identity = 0.0;  // |mean flux of nu minimizer - grad_p nu|
    double quad_response_low = 0.0;   // violation of the lower quadratic response bound
    double quad_response_high = 0.0;  // violation of the upper bound
};

DerivativeResiduals derivative_identities_check(const CoefficientSample& field,
                                                const TriadicCube& cube, const Vec& p,
                                                const Vec& q, const EnergyOptions& opts = {},
                                                double fd_step = 1e-4);

/// J_1 on a heat-kernel mask, maximized over the corrector-tilted affine
/// family xi -> xi + grad phi_xi (the span of the periodic correctors).
double j1_mask(const CorrectorSet& correctors, const HeatKernelMask& mask, const Vec& p,
               const Vec& q);

}  // namespace homolab
