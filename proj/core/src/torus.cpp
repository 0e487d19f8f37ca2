#include "homolab/torus.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace homolab {

TorusOperator::TorusOperator(const Grid& torus, std::vector<SymMat> coeff)
    : grid_(torus), coeff_(std::move(coeff)) {
    if (!torus.periodic) throw std::invalid_argument("TorusOperator: periodic grid required");
    if (static_cast<int64_t>(coeff_.size()) != torus.num_cells())
        throw std::invalid_argument("TorusOperator: coefficient array does not match grid");
    for (const auto& m : coeff_)
        for (int i = 0; i < torus.dim; ++i)
            for (int j = 0; j < torus.dim; ++j)
                if (i != j && std::abs(m(i, j)) > 1e-14)
                    throw std::invalid_argument(
                        "TorusOperator: diagonal coefficient matrices required on the torus");
}

int64_t TorusOperator::shift_index(int64_t idx, int axis, int64_t delta) const {
    auto c = grid_.cell_coords(idx);
    c[axis] = grid_.wrap(c[axis] + delta, axis);
    return grid_.cell_index(c);
}

void TorusOperator::apply(const double* u, double* out) const {
    int64_t n = size();
    int d = grid_.dim;
    double h = grid_.h;
    double hd = std::pow(h, d);
    std::memset(out, 0, sizeof(double) * static_cast<size_t>(n));
    // out(z) += h^d sum_j [ aE_j(z) (u(z)-u(z+e_j)) + aE_j(z-e_j) (u(z)-u(z-e_j)) ] / h^2
    for (int64_t i = 0; i < n; ++i) {
        double acc = 0;
        for (int j = 0; j < d; ++j) {
            int64_t ip = shift_index(i, j, +1);
            int64_t im = shift_index(i, j, -1);
            double ae_here = coeff_[static_cast<size_t>(i)](j, j);
            double ae_prev = coeff_[static_cast<size_t>(im)](j, j);
            acc += ae_here * (u[i] - u[ip]) + ae_prev * (u[i] - u[im]);
        }
        out[i] = acc * hd / (h * h);
    }
}

VectorField TorusOperator::gradient(const double* u) const {
    VectorField g(grid_, /*staggered_edges=*/true);
    int64_t n = size();
    for (int j = 0; j < grid_.dim; ++j) {
        for (int64_t i = 0; i < n; ++i) {
            int64_t ip = shift_index(i, j, +1);
            g.comp[j][static_cast<size_t>(i)] = (u[ip] - u[i]) / grid_.h;
        }
    }
    return g;
}

VectorField TorusOperator::flux(const double* u, const Vec& xi) const {
    VectorField F = gradient(u);
    int64_t n = size();
    for (int j = 0; j < grid_.dim; ++j)
        for (int64_t i = 0; i < n; ++i)
            F.comp[j][static_cast<size_t>(i)] =
                coeff_[static_cast<size_t>(i)](j, j) *
                (xi[j] + F.comp[j][static_cast<size_t>(i)]);
    return F;
}

ScalarField TorusOperator::divergence(const VectorField& F) const {
    ScalarField div(grid_, Centering::Cell);
    int64_t n = size();
    for (int64_t i = 0; i < n; ++i) {
        double acc = 0;
        for (int j = 0; j < grid_.dim; ++j) {
            int64_t im = shift_index(i, j, -1);
            acc += (F.comp[j][static_cast<size_t>(i)] - F.comp[j][static_cast<size_t>(im)]) /
                   grid_.h;
        }
        div.data[static_cast<size_t>(i)] = acc;
    }
    return div;
}

std::vector<double> TorusOperator::cell_problem_rhs(const Vec& xi) const {
    // b(z) = h^d * D- . (a xi)(z); pairing apply(phi) = b gives the
    // Euler-Lagrange equations of 1/2 |xi + D+ phi|_a^2.
    int64_t n = size();
    int d = grid_.dim;
    double hd = std::pow(grid_.h, d);
    std::vector<double> b(static_cast<size_t>(n), 0.0);
    for (int64_t i = 0; i < n; ++i) {
        double acc = 0;
        for (int j = 0; j < d; ++j) {
            int64_t im = shift_index(i, j, -1);
            double f_here = coeff_[static_cast<size_t>(i)](j, j) * xi[j];
            double f_prev = coeff_[static_cast<size_t>(im)](j, j) * xi[j];
            acc += (f_here - f_prev) / grid_.h;
        }
        b[static_cast<size_t>(i)] = acc * hd;
    }
    return b;
}

double TorusOperator::energy(const double* u, const Vec& xi) const {
    int64_t n = size();
    int d = grid_.dim;
    double hd = std::pow(grid_.h, d);
    double e = 0;
    for (int64_t i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) {
            int64_t ip = shift_index(i, j, +1);
            double gj = xi[j] + (u[ip] - u[i]) / grid_.h;
            e += coeff_[static_cast<size_t>(i)](j, j) * gj * gj;
        }
    }
    return 0.5 * e * hd;
}

double TorusOperator::mean_coeff_scale() const {
    double s = 0;
    for (const auto& m : coeff_) {
        double tr = 0;
        for (int a = 0; a < grid_.dim; ++a) tr += m(a, a);
        s += tr / grid_.dim;
    }
    return s / static_cast<double>(coeff_.size());
}

SolveReport solve_periodic_cell(const TorusOperator& op, const Vec& xi,
                                const SolverOptions& opts) {
    const Grid& g = op.grid();
    int64_t n = op.size();
    std::vector<double> b = op.cell_problem_rhs(xi);
    auto project = [n](double* v) {
        double m = 0;
        for (int64_t i = 0; i < n; ++i) m += v[i];
        m /= static_cast<double>(n);
        for (int64_t i = 0; i < n; ++i) v[i] -= m;
    };
    auto apply_full = [&](const double* u, double* out) { op.apply(u, out); };
    std::unique_ptr<SpectralPoisson> prec;
    std::function<void(const double*, double*)> precond = nullptr;
    if (opts.spectral_precond) {
        prec = std::make_unique<SpectralPoisson>(
            g, SymMat::identity(g.dim, op.mean_coeff_scale()));
        double hd = std::pow(g.h, g.dim);
        precond = [&, hd](const double* in, double* out) {
            // SpectralPoisson inverts the per-volume operator; apply() here
            // carries an extra h^d quadrature factor.
            prec->solve(in, out);
            for (int64_t i = 0; i < n; ++i) out[i] /= hd;
        };
    }
    int max_iter = opts.max_iter > 0
                       ? opts.max_iter
                       : static_cast<int>(50 * *std::max_element(g.cells.begin(),
                                                                 g.cells.begin() + g.dim) +
                                          200);
    SolveReport rep;
    rep.solution = ScalarField(g, Centering::Cell);
    CgResult cg = pcg(n, apply_full, precond, b.data(), rep.solution.data.data(), opts.tol,
                      max_iter, project, opts.record_history);
    project(rep.solution.data.data());
    rep.iterations = cg.iterations;
    rep.relative_residual = cg.rel_residual;
    rep.converged = cg.converged || cg.iterations == 0;
    rep.residual_history = std::move(cg.history);
    double vol = g.box_volume();
    rep.energy = op.energy(rep.solution.data.data(), xi) / vol;
    rep.value = rep.energy;
    if (!rep.converged)
        throw std::runtime_error("solve_periodic_cell: CG did not reach tolerance (residual " +
                                 std::to_string(rep.relative_residual) + ")");
    return rep;
}

ScalarField solve_constant_poisson(const Grid& torus, const SymMat& c, const ScalarField& rhs) {
    if (!torus.periodic)
        throw std::invalid_argument("solve_constant_poisson: periodic grid required");
    double m = rhs.mean();
    double scale = rhs.l2_mean();
    if (std::abs(m) > 1e-10 * std::max(scale, 1e-30) && std::abs(m) > 1e-14)
        throw std::invalid_argument("solve_constant_poisson: rhs must have zero mean");
    SpectralPoisson sp(torus, c);
    ScalarField u(torus, Centering::Cell);
    sp.solve(rhs.data.data(), u.data.data());
    return u;
}

}  // namespace homolab
