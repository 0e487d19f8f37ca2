// Staggered edge scheme on the periodic torus.
//
// Sites live at z*h; the gradient D+ sends sites to edges ((D+_j u)(z) on the
// edge (z, z+e_j)), the divergence D- sends edges back to sites, and
// <D+ u, F> = -<u, D- . F> holds exactly. Edge fluxes of solutions are
// therefore divergence-free to solver precision, which makes the flux
// corrector and Helmholtz projection identities exact at grid level.
// Coefficients must be diagonal matrices; box problems handle full tensors.
#pragma once

#include <memory>
#include <vector>

#include "homolab/fft.hpp"
#include "homolab/field.hpp"
#include "homolab/grid.hpp"
#include "homolab/solver.hpp"

namespace homolab {

class TorusOperator {
   public:
    TorusOperator(const Grid& torus, std::vector<SymMat> coeff);

    const Grid& grid() const { return grid_; }
    int64_t size() const { return grid_.num_cells(); }
    const std::vector<SymMat>& coeff() const { return coeff_; }

    /// Unnormalized action  u -> h^d * (-D- . (a D+ u)).
    void apply(const double* u, double* out) const;

    /// Edge gradient D+ u.
    VectorField gradient(const double* u) const;

    /// Edge flux a (xi + D+ u).
    VectorField flux(const double* u, const Vec& xi) const;

    /// Discrete divergence D- . F of an edge field (per site).
    ScalarField divergence(const VectorField& F) const;

    /// Right-hand side of the cell problem -div(a(xi + D+ phi)) = 0:
    /// b = h^d * D- . (a xi).
    std::vector<double> cell_problem_rhs(const Vec& xi) const;

    /// Energy  (1/2) sum h^d a_jj (xi_j + D+_j u)^2  (unnormalized).
    double energy(const double* u, const Vec& xi) const;

    double mean_coeff_scale() const;

   private:
    Grid grid_;
    std::vector<SymMat> coeff_;

    int64_t shift_index(int64_t idx, int axis, int64_t delta) const;
    friend class TorusIndex;
};

/// Mean-zero periodic phi with -div(a(xi + grad phi)) = 0.
SolveReport solve_periodic_cell(const TorusOperator& op, const Vec& xi,
                                const SolverOptions& opts = {});

/// Mean-zero spectral solution of -div(c grad u) = rhs on the torus with a
/// constant coefficient matrix. Throws if the rhs has nonzero mean.
ScalarField solve_constant_poisson(const Grid& torus, const SymMat& c, const ScalarField& rhs);

}  // namespace homolab
