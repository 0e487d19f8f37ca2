// Triadic cubes, uniform grids, heat-kernel masks and mollifiers.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "homolab/smallmat.hpp"

namespace homolab {

/// Triadic cube of side 3^level centered at z (z in Z^d, 3^level-aligned
/// relative to the standard triadic hierarchy).
struct TriadicCube {
    int dim = 0;
    int level = 0;
    std::array<int64_t, kMaxDim> center{0, 0, 0};

    static TriadicCube centered(int dim, int level) {
        TriadicCube c;
        c.dim = dim;
        c.level = level;
        return c;
    }
    double side() const;
    double lo(int axis) const { return center[axis] - 0.5 * side(); }
    double hi(int axis) const { return center[axis] + 0.5 * side(); }
    double volume() const;
};

/// Level-n children tiling the parent exactly (3^{d(m-n)} of them).
std::vector<TriadicCube> subdivide(const TriadicCube& cube, int n);

enum class Centering { Node, Cell };

/// Uniform grid over a box. K cells per unit length; spacing h = 1/K.
struct Grid {
    int dim = 0;
    std::array<double, kMaxDim> origin{0, 0, 0};
    std::array<int64_t, kMaxDim> cells{1, 1, 1};
    double h = 1.0;
    bool periodic = false;

    static Grid box(int dim, const std::array<double, kMaxDim>& origin,
                    const std::array<int64_t, kMaxDim>& cells, double h, bool periodic = false);
    static Grid cube_box(const TriadicCube& cube, int cells_per_unit, bool periodic = false);
    /// Torus [0, L)^d with K cells per unit.
    static Grid torus(int dim, int64_t L, int cells_per_unit);

    int64_t num_cells() const;
    int64_t num_nodes() const;  // = num_cells for periodic grids
    int64_t nodes_per_side(int axis) const { return periodic ? cells[axis] : cells[axis] + 1; }

    int64_t cell_index(const std::array<int64_t, kMaxDim>& c) const;
    int64_t node_index(const std::array<int64_t, kMaxDim>& n) const;
    std::array<int64_t, kMaxDim> cell_coords(int64_t idx) const;
    std::array<int64_t, kMaxDim> node_coords(int64_t idx) const;

    Vec cell_center(const std::array<int64_t, kMaxDim>& c) const;
    Vec node_pos(const std::array<int64_t, kMaxDim>& n) const;
    double cell_volume() const;
    double box_volume() const;
    double side_length(int axis) const { return cells[axis] * h; }

    int64_t wrap(int64_t i, int axis) const {
        int64_t n = cells[axis];
        i %= n;
        return i < 0 ? i + n : i;
    }

    bool same_geometry(const Grid& o) const;
};

/// Scalar data on a grid, either at nodes or at cell centers.
struct ScalarField {
    Grid grid;
    Centering centering = Centering::Cell;
    std::vector<double> data;

    ScalarField() = default;
    ScalarField(const Grid& g, Centering c, double fill = 0.0)
        : grid(g), centering(c),
          data(static_cast<size_t>(c == Centering::Cell ? g.num_cells() : g.num_nodes()), fill) {}

    double mean() const;
    double l2_mean() const;  // normalized: sqrt(mean of squares)
    void subtract_mean();
};

/// d-component data. Cell centering holds one value per component per cell;
/// Edge centering staggers component j at edges (z, z+e_j), stored at z.
struct VectorField {
    Grid grid;
    Centering centering = Centering::Cell;  // Cell or (on tori) Edge semantics
    bool staggered = false;
    std::array<std::vector<double>, kMaxDim> comp;

    VectorField() = default;
    VectorField(const Grid& g, bool staggered_edges = false)
        : grid(g), staggered(staggered_edges) {
        for (int j = 0; j < g.dim; ++j)
            comp[j].assign(static_cast<size_t>(g.num_cells()), 0.0);
    }
    Vec mean() const;
    double l2_mean() const;
};

/// Discretized heat kernel weight Phi_{z,r} on the cells of a grid,
/// truncated at 6r and renormalized to unit discrete mass.
struct HeatKernelMask {
    Grid grid;
    Vec center;
    double scale = 1.0;
    std::vector<double> weights;  // per cell, sums (times cell volume) to 1

    double mass() const;
};

HeatKernelMask make_heat_mask(const Grid& grid, const Vec& center, double r);

/// Discretized standard mollifier zeta_eps (compact support |x| < eps).
struct Mollifier {
    double eps = 1.0;
    int radius_cells = 0;              // support radius in cells
    std::vector<double> weights;       // (2*radius+1)^d stencil, unit mass
    int dim = 0;
};

Mollifier make_mollifier(int dim, double eps, double h);

/// Pointwise value of the standard heat kernel Phi(t, x).
double heat_kernel(int dim, double t, const Vec& x);
/// Pointwise value of the standard mollifier zeta (unit mass, support B_1).
double standard_mollifier(int dim, const Vec& x);

/// Cell-weighted average of f over a triadic cube (cube must be inside the
/// grid box and aligned with cell boundaries).
double cube_average(const ScalarField& f, const TriadicCube& cube);

/// Heat semigroup smoothing: convolution with Phi(r^2, .). Spectral on
/// periodic grids, truncated direct sum (cutoff 6r, renormalized) otherwise.
ScalarField heat_convolve(const ScalarField& f, double r);

/// Value of (f * Phi(r^2, .)) at a single point (truncated sum route).
double heat_convolve_at(const ScalarField& f, double r, const Vec& x);

/// Mollification with the standard bump at scale eps. Near a non-periodic
/// boundary the truncated kernel is renormalized.
ScalarField mollify(const ScalarField& f, double eps);

}  // namespace homolab
