#include "homolab/solver.hpp"

#include <cmath>
#include <cstring>

namespace homolab {

namespace {

// Reference-element integrals for Q1 on the unit cube:
//   R[alpha][beta][i][j] = int d_alpha phi_i d_beta phi_j,
//   G[alpha][i]          = int d_alpha phi_i,
//   B[alpha][i][j]       = int d_alpha phi_i phi_j   (used for cell means).
// Evaluated once per dimension with tensor 2-point Gauss quadrature (exact
// for these integrands).
struct RefElement {
    int dim = 0;
    int nloc = 0;  // 2^dim
    double R[kMaxDim][kMaxDim][8][8] = {};
    double G[kMaxDim][8] = {};

    explicit RefElement(int d) : dim(d), nloc(1 << d) {
        const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
        int npts = 1;
        for (int a = 0; a < d; ++a) npts *= 2;
        for (int q = 0; q < npts; ++q) {
            double x[kMaxDim];
            int rem = q;
            for (int a = 0; a < d; ++a) {
                x[a] = gp[rem & 1];
                rem >>= 1;
            }
            double w = 1.0 / npts;
            // basis values and gradients at x
            double grad[8][kMaxDim];
            for (int i = 0; i < nloc; ++i) {
                for (int a = 0; a < d; ++a) {
                    double g = 1.0;
                    for (int b = 0; b < d; ++b) {
                        double f = ((i >> b) & 1) ? x[b] : 1.0 - x[b];
                        double df = ((i >> b) & 1) ? 1.0 : -1.0;
                        g *= (b == a) ? df : f;
                    }
                    grad[i][a] = g;
                }
            }
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b)
                    for (int i = 0; i < nloc; ++i)
                        for (int j = 0; j < nloc; ++j)
                            R[a][b][i][j] += w * grad[i][a] * grad[j][b];
            for (int a = 0; a < d; ++a)
                for (int i = 0; i < nloc; ++i) G[a][i] += w * grad[i][a];
        }
    }
};

const RefElement& ref_element(int dim) {
    static RefElement r1(1), r2(2), r3(3);
    switch (dim) {
        case 1: return r1;
        case 2: return r2;
        default: return r3;
    }
}

}  // namespace

CgResult pcg(int64_t n, const std::function<void(const double*, double*)>& apply_op,
             const std::function<void(const double*, double*)>& precond, const double* b,
             double* x, double tol, int max_iter,
             const std::function<void(double*)>& project, bool record_history) {
    std::vector<double> r(static_cast<size_t>(n)), z(static_cast<size_t>(n)),
        p(static_cast<size_t>(n)), ap(static_cast<size_t>(n));
    CgResult res;
    std::memset(x, 0, sizeof(double) * static_cast<size_t>(n));
    std::memcpy(r.data(), b, sizeof(double) * static_cast<size_t>(n));
    if (project) project(r.data());
    double bnorm = 0;
    for (int64_t i = 0; i < n; ++i) bnorm += r[static_cast<size_t>(i)] * r[static_cast<size_t>(i)];
    bnorm = std::sqrt(bnorm);
    if (bnorm == 0) {
        res.converged = true;
        return res;
    }
    if (precond)
        precond(r.data(), z.data());
    else
        std::memcpy(z.data(), r.data(), sizeof(double) * static_cast<size_t>(n));
    if (project) project(z.data());
    std::memcpy(p.data(), z.data(), sizeof(double) * static_cast<size_t>(n));
    double rz = 0;
    for (int64_t i = 0; i < n; ++i) rz += r[static_cast<size_t>(i)] * z[static_cast<size_t>(i)];
    for (int it = 0; it < max_iter; ++it) {
        apply_op(p.data(), ap.data());
        if (project) project(ap.data());
        double pap = 0;
        for (int64_t i = 0; i < n; ++i)
            pap += p[static_cast<size_t>(i)] * ap[static_cast<size_t>(i)];
        if (pap <= 0) break;  // operator not SPD on this subspace
        double alpha = rz / pap;
        double rnorm2 = 0;
        for (int64_t i = 0; i < n; ++i) {
            x[i] += alpha * p[static_cast<size_t>(i)];
            r[static_cast<size_t>(i)] -= alpha * ap[static_cast<size_t>(i)];
            rnorm2 += r[static_cast<size_t>(i)] * r[static_cast<size_t>(i)];
        }
        res.iterations = it + 1;
        res.rel_residual = std::sqrt(rnorm2) / bnorm;
        if (record_history) res.history.push_back(res.rel_residual);
        if (res.rel_residual <= tol) {
            res.converged = true;
            break;
        }
        if (precond)
            precond(r.data(), z.data());
        else
            std::memcpy(z.data(), r.data(), sizeof(double) * static_cast<size_t>(n));
        if (project) project(z.data());
        double rz_new = 0;
        for (int64_t i = 0; i < n; ++i)
            rz_new += r[static_cast<size_t>(i)] * z[static_cast<size_t>(i)];
        double beta = rz_new / rz;
        rz = rz_new;
        for (int64_t i = 0; i < n; ++i)
            p[static_cast<size_t>(i)] = z[static_cast<size_t>(i)] + beta * p[static_cast<size_t>(i)];
    }
    return res;
}

BoxOperator::BoxOperator(const Grid& grid, std::vector<SymMat> coeff, Bc bc)
    : grid_(grid), coeff_(std::move(coeff)), bc_(bc) {
    if (bc == Bc::Periodic)
        throw std::invalid_argument("BoxOperator: use TorusOperator for periodic problems");
    if (static_cast<int64_t>(coeff_.size()) != grid_.num_cells())
        throw std::invalid_argument("BoxOperator: coefficient array does not match grid");
}

bool BoxOperator::is_boundary_node(const std::array<int64_t, kMaxDim>& n) const {
    for (int a = 0; a < grid_.dim; ++a)
        if (n[a] == 0 || n[a] == grid_.cells[a]) return true;
    return false;
}

double BoxOperator::mean_coeff_scale() const {
    double s = 0;
    for (const auto& m : coeff_) {
        double tr = 0;
        for (int a = 0; a < grid_.dim; ++a) tr += m(a, a);
        s += tr / grid_.dim;
    }
    return s / static_cast<double>(coeff_.size());
}

void BoxOperator::apply(const double* u, double* out) const {
    const RefElement& ref = ref_element(grid_.dim);
    int64_t nn = grid_.num_nodes();
    std::memset(out, 0, sizeof(double) * static_cast<size_t>(nn));
    double hpow = std::pow(grid_.h, grid_.dim - 2);
    int d = grid_.dim;
    int nloc = ref.nloc;
    int64_t ncells = grid_.num_cells();
    for (int64_t c = 0; c < ncells; ++c) {
        auto cc = grid_.cell_coords(c);
        // local node i has offset bit a meaning +1 along axis a
        int64_t gi[8];
        for (int i = 0; i < nloc; ++i) {
            std::array<int64_t, kMaxDim> nc = cc;
            for (int a = 0; a < d; ++a)
                if ((i >> a) & 1) nc[a] += 1;
            gi[i] = grid_.node_index(nc);
        }
        const SymMat& a = coeff_[static_cast<size_t>(c)];
        double uloc[8];
        for (int i = 0; i < nloc; ++i) uloc[i] = u[gi[i]];
        double eloc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
        for (int al = 0; al < d; ++al) {
            for (int be = 0; be < d; ++be) {
                double w = a(al, be) * hpow;
                if (w == 0.0) continue;
                const auto& R = ref.R[al][be];
                for (int i = 0; i < nloc; ++i) {
                    double s = 0;
                    for (int j = 0; j < nloc; ++j) s += R[i][j] * uloc[j];
                    eloc[i] += w * s;
                }
            }
        }
        for (int i = 0; i < nloc; ++i) out[gi[i]] += eloc[i];
    }
}

std::vector<double> BoxOperator::flux_rhs(const Vec& q) const {
    const RefElement& ref = ref_element(grid_.dim);
    int64_t nn = grid_.num_nodes();
    std::vector<double> b(static_cast<size_t>(nn), 0.0);
    double hpow = std::pow(grid_.h, grid_.dim - 1);
    int d = grid_.dim;
    int nloc = ref.nloc;
    int64_t ncells = grid_.num_cells();
    for (int64_t c = 0; c < ncells; ++c) {
        auto cc = grid_.cell_coords(c);
        for (int i = 0; i < nloc; ++i) {
            std::array<int64_t, kMaxDim> nc = cc;
            for (int a = 0; a < d; ++a)
                if ((i >> a) & 1) nc[a] += 1;
            int64_t gi = grid_.node_index(nc);
            double s = 0;
            for (int a = 0; a < d; ++a) s += q[a] * ref.G[a][i];
            b[static_cast<size_t>(gi)] += s * hpow;
        }
    }
    return b;
}

double BoxOperator::energy(const double* u) const {
    std::vector<double> au(static_cast<size_t>(grid_.num_nodes()));
    apply(u, au.data());
    double e = 0;
    int64_t nn = grid_.num_nodes();
    for (int64_t i = 0; i < nn; ++i) e += u[i] * au[static_cast<size_t>(i)];
    return 0.5 * e;
}

double BoxOperator::bilinear(const double* w, const double* v) const {
    std::vector<double> av(static_cast<size_t>(grid_.num_nodes()));
    apply(v, av.data());
    double e = 0;
    int64_t nn = grid_.num_nodes();
    for (int64_t i = 0; i < nn; ++i) e += w[i] * av[static_cast<size_t>(i)];
    return e;
}

VectorField BoxOperator::cell_gradient(const double* u) const {
    const RefElement& ref = ref_element(grid_.dim);
    VectorField g(grid_);
    int d = grid_.dim;
    int nloc = ref.nloc;
    int64_t ncells = grid_.num_cells();
    for (int64_t c = 0; c < ncells; ++c) {
        auto cc = grid_.cell_coords(c);
        double uloc[8];
        for (int i = 0; i < nloc; ++i) {
            std::array<int64_t, kMaxDim> nc = cc;
            for (int a = 0; a < d; ++a)
                if ((i >> a) & 1) nc[a] += 1;
            uloc[i] = u[grid_.node_index(nc)];
        }
        for (int a = 0; a < d; ++a) {
            double s = 0;
            for (int i = 0; i < nloc; ++i) s += ref.G[a][i] * uloc[i];
            g.comp[a][static_cast<size_t>(c)] = s / grid_.h;
        }
    }
    return g;
}

Vec BoxOperator::mean_gradient(const double* u) const {
    VectorField g = cell_gradient(u);
    return g.mean();
}

Vec BoxOperator::mean_flux(const double* u) const {
    VectorField g = cell_gradient(u);
    Vec m(grid_.dim);
    int64_t ncells = grid_.num_cells();
    for (int64_t c = 0; c < ncells; ++c) {
        const SymMat& a = coeff_[static_cast<size_t>(c)];
        Vec gc(grid_.dim);
        for (int j = 0; j < grid_.dim; ++j) gc[j] = g.comp[j][static_cast<size_t>(c)];
        Vec f = a.apply(gc);
        for (int j = 0; j < grid_.dim; ++j) m[j] += f[j];
    }
    return m * (1.0 / static_cast<double>(ncells));
}

namespace {

int default_max_iter(const Grid& g, const SolverOptions& opts) {
    if (opts.max_iter > 0) return opts.max_iter;
    int64_t side = 0;
    for (int a = 0; a < g.dim; ++a) side = std::max(side, g.cells[a]);
    return static_cast<int>(50 * side + 200);
}

struct InteriorMap {
    // maps between full node vectors and interior-only vectors
    const Grid* g;
    std::array<int64_t, kMaxDim> interior_dims{1, 1, 1};
    int64_t n_int = 1;

    explicit InteriorMap(const Grid& grid) : g(&grid) {
        for (int a = 0; a < grid.dim; ++a) {
            interior_dims[a] = grid.cells[a] - 1;
            n_int *= interior_dims[a];
        }
    }
    void scatter(const double* interior, double* full) const {
        int64_t nn = g->num_nodes();
        std::memset(full, 0, sizeof(double) * static_cast<size_t>(nn));
        for (int64_t i = 0; i < n_int; ++i) {
            std::array<int64_t, kMaxDim> nc{0, 0, 0};
            int64_t rem = i;
            for (int a = g->dim - 1; a >= 0; --a) {
                nc[a] = rem % interior_dims[a] + 1;
                rem /= interior_dims[a];
            }
            full[g->node_index(nc)] = interior[i];
        }
    }
    void gather(const double* full, double* interior) const {
        for (int64_t i = 0; i < n_int; ++i) {
            std::array<int64_t, kMaxDim> nc{0, 0, 0};
            int64_t rem = i;
            for (int a = g->dim - 1; a >= 0; --a) {
                nc[a] = rem % interior_dims[a] + 1;
                rem /= interior_dims[a];
            }
            interior[i] = full[g->node_index(nc)];
        }
    }
};

}  // namespace

SolveReport solve_dirichlet_data(const BoxOperator& op, const std::vector<double>& boundary,
                                 const SolverOptions& opts) {
    const Grid& g = op.grid();
    int64_t nn = g.num_nodes();
    InteriorMap im(g);
    // x0: boundary data extended by zero
    std::vector<double> x0(static_cast<size_t>(nn), 0.0);
    for (int64_t i = 0; i < nn; ++i) {
        auto nc = g.node_coords(i);
        if (op.is_boundary_node(nc)) x0[static_cast<size_t>(i)] = boundary[static_cast<size_t>(i)];
    }
    std::vector<double> ax0(static_cast<size_t>(nn));
    op.apply(x0.data(), ax0.data());
    std::vector<double> b_int(static_cast<size_t>(im.n_int));
    im.gather(ax0.data(), b_int.data());
    for (auto& v : b_int) v = -v;

    std::vector<double> full_tmp(static_cast<size_t>(nn)), full_out(static_cast<size_t>(nn));
    auto apply_int = [&](const double* u, double* out) {
        im.scatter(u, full_tmp.data());
        op.apply(full_tmp.data(), full_out.data());
        im.gather(full_out.data(), out);
    };
    std::unique_ptr<BoxFdInverse> prec;
    std::function<void(const double*, double*)> precond = nullptr;
    if (opts.spectral_precond) {
        prec = std::make_unique<BoxFdInverse>(g, BoxFdInverse::Kind::DirichletInterior,
                                              op.mean_coeff_scale() * std::pow(g.h, g.dim));
        precond = [&](const double* in, double* out) { prec->apply_inverse(in, out); };
    }
    std::vector<double> u_int(static_cast<size_t>(im.n_int), 0.0);
    CgResult cg = pcg(im.n_int, apply_int, precond, b_int.data(), u_int.data(), opts.tol,
                      default_max_iter(g, opts), nullptr, opts.record_history);

    SolveReport rep;
    rep.solution = ScalarField(g, Centering::Node);
    im.scatter(u_int.data(), rep.solution.data.data());
    for (int64_t i = 0; i < nn; ++i)
        rep.solution.data[static_cast<size_t>(i)] += x0[static_cast<size_t>(i)];
    rep.iterations = cg.iterations;
    rep.relative_residual = cg.rel_residual;
    rep.converged = cg.converged || cg.iterations == 0;
    rep.residual_history = std::move(cg.history);
    rep.energy = op.energy(rep.solution.data.data()) / g.box_volume();
    rep.value = rep.energy;
    if (!rep.converged)
        throw std::runtime_error("solve_dirichlet: CG did not reach tolerance (residual " +
                                 std::to_string(rep.relative_residual) + ")");
    return rep;
}

SolveReport solve_dirichlet_affine(const BoxOperator& op, const Vec& p,
                                   const SolverOptions& opts) {
    const Grid& g = op.grid();
    int64_t nn = g.num_nodes();
    std::vector<double> bdata(static_cast<size_t>(nn), 0.0);
    for (int64_t i = 0; i < nn; ++i) {
        auto nc = g.node_coords(i);
        Vec x = g.node_pos(nc);
        bdata[static_cast<size_t>(i)] = p.dot(x);
    }
    return solve_dirichlet_data(op, bdata, opts);
}

SolveReport solve_neumann_flux(const BoxOperator& op, const Vec& q, const SolverOptions& opts) {
    const Grid& g = op.grid();
    int64_t nn = g.num_nodes();
    std::vector<double> b = op.flux_rhs(q);
    // consistency: rhs must be orthogonal to constants
    double bsum = 0, bmag = 0;
    for (double v : b) {
        bsum += v;
        bmag += std::abs(v);
    }
    if (bmag > 0 && std::abs(bsum) > 1e-9 * bmag)
        throw std::runtime_error("solve_neumann_flux: rhs not orthogonal to constants");
    auto project = [nn](double* v) {
        double m = 0;
        for (int64_t i = 0; i < nn; ++i) m += v[i];
        m /= static_cast<double>(nn);
        for (int64_t i = 0; i < nn; ++i) v[i] -= m;
    };
    auto apply_full = [&](const double* u, double* out) { op.apply(u, out); };
    std::unique_ptr<BoxFdInverse> prec;
    std::function<void(const double*, double*)> precond = nullptr;
    if (opts.spectral_precond) {
        prec = std::make_unique<BoxFdInverse>(g, BoxFdInverse::Kind::NeumannNodes,
                                              op.mean_coeff_scale() * std::pow(g.h, g.dim));
        precond = [&](const double* in, double* out) { prec->apply_inverse(in, out); };
    }
    SolveReport rep;
    rep.solution = ScalarField(g, Centering::Node);
    CgResult cg = pcg(nn, apply_full, precond, b.data(), rep.solution.data.data(), opts.tol,
                      default_max_iter(g, opts), project, opts.record_history);
    project(rep.solution.data.data());
    rep.iterations = cg.iterations;
    rep.relative_residual = cg.rel_residual;
    rep.converged = cg.converged || cg.iterations == 0;
    rep.residual_history = std::move(cg.history);
    double vol = g.box_volume();
    double bu = 0;
    for (int64_t i = 0; i < nn; ++i)
        bu += b[static_cast<size_t>(i)] * rep.solution.data[static_cast<size_t>(i)];
    rep.energy = op.energy(rep.solution.data.data()) / vol;
    rep.value = 0.5 * bu / vol;  // attained maximum
    if (!rep.converged)
        throw std::runtime_error("solve_neumann_flux: CG did not reach tolerance (residual " +
                                 std::to_string(rep.relative_residual) + ")");
    return rep;
}


PeriodicQ1Operator::PeriodicQ1Operator(const Grid& torus, std::vector<SymMat> coeff)
    : grid_(torus), coeff_(std::move(coeff)) {
    if (!torus.periodic)
        throw std::invalid_argument("PeriodicQ1Operator: periodic grid required");
    if (static_cast<int64_t>(coeff_.size()) != torus.num_cells())
        throw std::invalid_argument("PeriodicQ1Operator: coefficient array does not match grid");
}

void PeriodicQ1Operator::apply(const double* u, double* out) const {
    const RefElement& ref = ref_element(grid_.dim);
    int64_t n = grid_.num_cells();
    std::memset(out, 0, sizeof(double) * static_cast<size_t>(n));
    double hpow = std::pow(grid_.h, grid_.dim - 2);
    int d = grid_.dim;
    int nloc = ref.nloc;
    for (int64_t c = 0; c < n; ++c) {
        auto cc = grid_.cell_coords(c);
        int64_t gi[8];
        for (int i = 0; i < nloc; ++i) {
            std::array<int64_t, kMaxDim> nc = cc;
            for (int a = 0; a < d; ++a)
                if ((i >> a) & 1) nc[a] = grid_.wrap(nc[a] + 1, a);
            gi[i] = grid_.cell_index(nc);
        }
        const SymMat& a = coeff_[static_cast<size_t>(c)];
        double uloc[8];
        for (int i = 0; i < nloc; ++i) uloc[i] = u[gi[i]];
        double eloc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
        for (int al = 0; al < d; ++al) {
            for (int be = 0; be < d; ++be) {
                double w = a(al, be) * hpow;
                if (w == 0.0) continue;
                const auto& R = ref.R[al][be];
                for (int i = 0; i < nloc; ++i) {
                    double s = 0;
                    for (int j = 0; j < nloc; ++j) s += R[i][j] * uloc[j];
                    eloc[i] += w * s;
                }
            }
        }
        for (int i = 0; i < nloc; ++i) out[gi[i]] += eloc[i];
    }
}

std::vector<double> PeriodicQ1Operator::cell_problem_rhs(const Vec& xi) const {
    const RefElement& ref = ref_element(grid_.dim);
    int64_t n = grid_.num_cells();
    std::vector<double> b(static_cast<size_t>(n), 0.0);
    double hpow = std::pow(grid_.h, grid_.dim - 1);
    int d = grid_.dim;
    int nloc = ref.nloc;
    for (int64_t c = 0; c < n; ++c) {
        auto cc = grid_.cell_coords(c);
        Vec axi = coeff_[static_cast<size_t>(c)].apply(xi);
        for (int i = 0; i < nloc; ++i) {
            std::array<int64_t, kMaxDim> nc = cc;
            for (int a = 0; a < d; ++a)
                if ((i >> a) & 1) nc[a] = grid_.wrap(nc[a] + 1, a);
            double s = 0;
            for (int a = 0; a < d; ++a) s += axi[a] * ref.G[a][i];
            b[static_cast<size_t>(grid_.cell_index(nc))] -= s * hpow;
        }
    }
    return b;
}

VectorField PeriodicQ1Operator::cell_gradient(const double* u) const {
    const RefElement& ref = ref_element(grid_.dim);
    VectorField g(grid_);
    int d = grid_.dim;
    int nloc = ref.nloc;
    int64_t n = grid_.num_cells();
    for (int64_t c = 0; c < n; ++c) {
        auto cc = grid_.cell_coords(c);
        double uloc[8];
        for (int i = 0; i < nloc; ++i) {
            std::array<int64_t, kMaxDim> nc = cc;
            for (int a = 0; a < d; ++a)
                if ((i >> a) & 1) nc[a] = grid_.wrap(nc[a] + 1, a);
            uloc[i] = u[grid_.cell_index(nc)];
        }
        for (int a = 0; a < d; ++a) {
            double s = 0;
            for (int i = 0; i < nloc; ++i) s += ref.G[a][i] * uloc[i];
            g.comp[a][static_cast<size_t>(c)] = s / grid_.h;
        }
    }
    return g;
}

double PeriodicQ1Operator::mean_coeff_scale() const {
    double s = 0;
    for (const auto& m : coeff_) {
        double tr = 0;
        for (int a = 0; a < grid_.dim; ++a) tr += m(a, a);
        s += tr / grid_.dim;
    }
    return s / static_cast<double>(coeff_.size());
}

SolveReport solve_periodic_cell_q1(const PeriodicQ1Operator& op, const Vec& xi,
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
            prec->solve(in, out);
            for (int64_t i = 0; i < n; ++i) out[i] /= hd;
        };
    }
    int64_t side = 0;
    for (int a = 0; a < g.dim; ++a) side = std::max(side, g.cells[a]);
    int max_iter = opts.max_iter > 0 ? opts.max_iter : static_cast<int>(50 * side + 200);
    SolveReport rep;
    rep.solution = ScalarField(g, Centering::Cell);
    CgResult cg = pcg(n, apply_full, precond, b.data(), rep.solution.data.data(), opts.tol,
                      max_iter, project, opts.record_history);
    project(rep.solution.data.data());
    rep.iterations = cg.iterations;
    rep.relative_residual = cg.rel_residual;
    rep.converged = cg.converged || cg.iterations == 0;
    if (!rep.converged)
        throw std::runtime_error("solve_periodic_cell_q1: CG did not reach tolerance");
    return rep;
}

}  // namespace homolab
