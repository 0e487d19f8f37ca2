// Discrete forms of  -div(a grad u)  and their solvers.
//
// Box problems (Dirichlet / Neumann) use Q1 elements with one coefficient
// value per cell and exactly integrated element matrices. Periodic problems
// use the staggered edge scheme in torus.hpp, for which the discrete vector
// calculus identities are exact; see that header.
#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "homolab/fft.hpp"
#include "homolab/field.hpp"
#include "homolab/grid.hpp"

namespace homolab {

enum class Bc { Dirichlet, Neumann, Periodic };

struct SolverOptions {
    double tol = 1e-10;       // relative residual
    int max_iter = 0;         // 0: default 50 * (max cells per side)
    bool spectral_precond = true;
    bool record_history = false;
};

struct SolveReport {
    ScalarField solution;     // nodal values (torus: one value per site)
    double relative_residual = 0.0;
    int iterations = 0;
    double energy = 0.0;      // (1/|U|) int 1/2 grad u . a grad u
    double value = 0.0;       // problem-specific objective (nu, nu*, ...)
    bool converged = false;
    std::vector<double> residual_history;
};

struct CgResult {
    int iterations = 0;
    double rel_residual = 0.0;
    bool converged = false;
    std::vector<double> history;
};

/// Preconditioned conjugate gradients on a matrix-free SPD operator.
/// `project`, when given, is applied to keep iterates in a constraint
/// subspace (e.g. mean zero).
CgResult pcg(int64_t n, const std::function<void(const double*, double*)>& apply_op,
             const std::function<void(const double*, double*)>& precond, const double* b,
             double* x, double tol, int max_iter,
             const std::function<void(double*)>& project = nullptr,
             bool record_history = false);

/// Q1 finite element operator on a box grid with per-cell coefficients.
class BoxOperator {
   public:
    BoxOperator(const Grid& grid, std::vector<SymMat> coeff, Bc bc);

    const Grid& grid() const { return grid_; }
    Bc bc() const { return bc_; }
    int64_t num_nodes() const { return grid_.num_nodes(); }
    const std::vector<SymMat>& coeff() const { return coeff_; }

    /// Unnormalized stiffness action on the full node space.
    void apply(const double* u, double* out) const;

    /// b_i = int q . grad phi_i over the box (unnormalized).
    std::vector<double> flux_rhs(const Vec& q) const;

    /// Energy  int 1/2 grad u . a grad u  (unnormalized).
    double energy(const double* u) const;

    /// <grad w, a grad v> over the box (unnormalized).
    double bilinear(const double* w, const double* v) const;

    /// Mean of grad u over the box.
    Vec mean_gradient(const double* u) const;
    /// Mean of a grad u over the box.
    Vec mean_flux(const double* u) const;

    /// Cell-centered gradient (average of grad u over each cell).
    VectorField cell_gradient(const double* u) const;

    bool is_boundary_node(const std::array<int64_t, kMaxDim>& n) const;
    double mean_coeff_scale() const;

   private:
    Grid grid_;
    std::vector<SymMat> coeff_;
    Bc bc_;
};

/// Dirichlet problem with affine boundary data l_p. Returns the nu-type
/// report: value = energy per unit volume of the minimizer.
SolveReport solve_dirichlet_affine(const BoxOperator& op, const Vec& p,
                                   const SolverOptions& opts = {});

/// Dirichlet problem with arbitrary nodal boundary data g (values read at
/// boundary nodes of the supplied full-length vector).
SolveReport solve_dirichlet_data(const BoxOperator& op, const std::vector<double>& boundary,
                                 const SolverOptions& opts = {});

/// Neumann-type maximization sup_u int(-1/2 grad u . a grad u + q . grad u);
/// value = attained maximum per unit volume (nu*), solution mean zero.
SolveReport solve_neumann_flux(const BoxOperator& op, const Vec& q,
                               const SolverOptions& opts = {});

/// Q1 elements on a periodic torus (nodes coincide with cell indices).
/// Used where the expansion must share the box discretization exactly.
class PeriodicQ1Operator {
   public:
    PeriodicQ1Operator(const Grid& torus, std::vector<SymMat> coeff);

    const Grid& grid() const { return grid_; }
    int64_t size() const { return grid_.num_cells(); }

    void apply(const double* u, double* out) const;
    /// rhs of the cell problem: b_i = -int grad phi_i . (a xi).
    std::vector<double> cell_problem_rhs(const Vec& xi) const;
    /// Cell-averaged gradient of nodal data (periodic wrap).
    VectorField cell_gradient(const double* u) const;
    double mean_coeff_scale() const;
    const std::vector<SymMat>& coeff() const { return coeff_; }

   private:
    Grid grid_;
    std::vector<SymMat> coeff_;
};

/// Mean-zero periodic phi with -div(a(xi + grad phi)) = 0 in the Q1 sense.
SolveReport solve_periodic_cell_q1(const PeriodicQ1Operator& op, const Vec& xi,
                                   const SolverOptions& opts = {});

}  // namespace homolab
