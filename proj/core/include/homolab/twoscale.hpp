// Two-scale expansion and homogenization error experiments on the unit box.
#pragma once

#include <vector>

#include "homolab/corrector.hpp"
#include "homolab/field.hpp"
#include "homolab/solver.hpp"

namespace homolab {

enum class TwoScaleData { Affine, SinSinh };

struct TwoScaleField {
    ScalarField w;          // nodal values of the expansion
    VectorField grad_w;     // cell-centered gradient
};

/// Periodic correctors in the same Q1 discretization as the box solves, so
/// that the expansion carries no scheme-mismatch floor.
struct Q1Correctors {
    Grid torus;
    int64_t L = 0;
    std::vector<ScalarField> phi;       // nodal (= cell-indexed) correctors
    std::vector<VectorField> grad_phi;  // Q1 cell-centered gradients
    SymMat ahom_per;
    int dim() const { return torus.dim; }
};

Q1Correctors compute_correctors_q1(const CoefficientSample& field, int64_t L,
                                   int cells_per_unit, const SolverOptions& solver = {});

/// w_eps(x) = u(x) + eps sum_j (d_j u * zeta_eps)(x) phi_j(x/eps).
/// u is nodal on a grid over the unit box whose cells align with the
/// corrector torus under x -> x/eps (torus side L = 1/eps, matching K).
TwoScaleField build_w_eps(const BoxOperator& hom_op, const ScalarField& u,
                          const Q1Correctors& correctors, double eps);

struct TwoScaleReport {
    double eps = 0.0;
    int sample = 0;
    double l2_error = 0.0;        // || u_eps - u ||_L2(U)
    double h1_error = 0.0;        // || grad u_eps - grad w_eps ||_L2(U)
    double weighted_error = 0.0;  // with the weight eps v dist(x, dU)
    double interior_error = 0.0;  // H1 error restricted to U_{1/4}
    Vec flux_avg;                 // mean flux of u_eps over U
    int iterations = 0;
};

struct TwoScaleOptions {
    int cells_per_eps_cell = 3;   // grid cells per coefficient cell
    TwoScaleData data = TwoScaleData::SinSinh;
    Vec slope;                    // for Affine data
    SolverOptions solver{};
};

/// Per (sample, eps) homogenization errors for the Dirichlet problem with
/// coefficient a(x/eps) on the unit box; eps must be a power of 1/3.
std::vector<TwoScaleReport> homogenization_errors(const FieldSpec& spec, const SymMat& ahom,
                                                  const std::vector<double>& eps_ladder,
                                                  int samples, uint64_t seed,
                                                  const TwoScaleOptions& opts = {});

struct SlopeReport {
    double l2_slope = 0.0;
    double h1_slope = 0.0;
    double weighted_slope = 0.0;
    double interior_slope = 0.0;
    bool degenerate = false;  // errors at the noise floor
};

SlopeReport slope_report(const std::vector<TwoScaleReport>& reports);

}  // namespace homolab
