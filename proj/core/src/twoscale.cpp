#include "homolab/twoscale.hpp"

#include <cmath>
#include <complex>
#include <map>

#include "homolab/parallel.hpp"

namespace homolab {

namespace {

// mollified cell field, truncated and renormalized near the boundary
ScalarField mollify_or_copy(const ScalarField& f, double eps) {
    if (eps < f.grid.h) return f;  // mollifier below resolution: identity
    return mollify(f, eps);
}

// centered differences of a cell field (one-sided at non-periodic edges)
VectorField cell_grad_of_cells(const ScalarField& f) {
    const Grid& g = f.grid;
    VectorField out(g);
    int64_t n = g.num_cells();
    for (int64_t i = 0; i < n; ++i) {
        auto c = g.cell_coords(i);
        for (int a = 0; a < g.dim; ++a) {
            auto cp = c, cm = c;
            double denom = 2 * g.h;
            if (c[a] + 1 < g.cells[a])
                cp[a] += 1;
            else
                denom -= g.h;
            if (c[a] > 0)
                cm[a] -= 1;
            else
                denom -= g.h;
            out.comp[a][static_cast<size_t>(i)] =
                (f.data[static_cast<size_t>(g.cell_index(cp))] -
                 f.data[static_cast<size_t>(g.cell_index(cm))]) /
                denom;
        }
    }
    return out;
}

double boundary_distance(const Grid& g, const Vec& x) {
    double dmin = 1e300;
    for (int a = 0; a < g.dim; ++a) {
        double lo = g.origin[a];
        double hi = g.origin[a] + g.side_length(a);
        dmin = std::min(dmin, std::min(x[a] - lo, hi - x[a]));
    }
    return dmin;
}

}  // namespace

Q1Correctors compute_correctors_q1(const CoefficientSample& field, int64_t L,
                                   int cells_per_unit, const SolverOptions& solver) {
    int d = field.dim();
    Grid torus = Grid::torus(d, L, cells_per_unit);
    PeriodicQ1Operator op(torus, restrict_to_torus(field, torus));
    Q1Correctors cs;
    cs.torus = torus;
    cs.L = L;
    cs.phi.resize(static_cast<size_t>(d));
    cs.grad_phi.resize(static_cast<size_t>(d));
    cs.ahom_per = SymMat(d);
    int64_t n = torus.num_cells();
    for (int j = 0; j < d; ++j) {
        SolveReport rep = solve_periodic_cell_q1(op, Vec::unit(d, j), solver);
        cs.phi[static_cast<size_t>(j)] = rep.solution;
        VectorField g = op.cell_gradient(rep.solution.data.data());
        // mean flux column: a (e_j + grad phi_j)
        Vec col(d);
        for (int64_t i = 0; i < n; ++i) {
            Vec gc(d);
            for (int c = 0; c < d; ++c) gc[c] = g.comp[c][static_cast<size_t>(i)];
            gc[j] += 1.0;
            Vec f = op.coeff()[static_cast<size_t>(i)].apply(gc);
            for (int c = 0; c < d; ++c) col[c] += f[c];
        }
        for (int c = 0; c < d; ++c) cs.ahom_per(c, j) = col[c] / static_cast<double>(n);
        cs.grad_phi[static_cast<size_t>(j)] = std::move(g);
    }
    cs.ahom_per = cs.ahom_per.symmetrized();
    return cs;
}

TwoScaleField build_w_eps(const BoxOperator& hom_op, const ScalarField& u,
                          const Q1Correctors& cs, double eps) {
    const Grid& g = u.grid;
    int d = g.dim;
    const Grid& tg = cs.torus;
    // alignment: grid cell i maps onto torus cell i (x/eps lands at centers)
    for (int a = 0; a < d; ++a)
        if (g.cells[a] != tg.cells[a])
            throw std::invalid_argument(
                "build_w_eps: corrector torus does not resolve 1/eps at matching resolution");

    VectorField grad_u = hom_op.cell_gradient(u.data.data());
    // mollified slopes s_j = (d_j u * zeta_eps)
    std::vector<ScalarField> s(static_cast<size_t>(d));
    std::vector<VectorField> grad_s(static_cast<size_t>(d));
    for (int j = 0; j < d; ++j) {
        ScalarField dj(g, Centering::Cell);
        dj.data = grad_u.comp[j];
        s[static_cast<size_t>(j)] = mollify_or_copy(dj, eps);
        grad_s[static_cast<size_t>(j)] = cell_grad_of_cells(s[static_cast<size_t>(j)]);
    }
    // d=2 anchoring of the corrector constant: subtract (phi * Phi_{L/2})(0)
    std::vector<double> anchor(static_cast<size_t>(d), 0.0);
    if (d == 2) {
        TorusFft fft(tg);
        int64_t nmodes = tg.num_cells();
        std::vector<std::complex<double>> hat(static_cast<size_t>(nmodes));
        double r = static_cast<double>(cs.L);  // heat scale 1/eps in law units
        for (int j = 0; j < d; ++j) {
            fft.forward(cs.phi[static_cast<size_t>(j)].data.data(), hat.data());
            double v = 0;
            for (int64_t k = 0; k < nmodes; ++k) {
                auto kap = fft.continuum_freq(k);
                double k2 = 0;
                for (int a = 0; a < d; ++a) k2 += kap[a] * kap[a];
                v += (hat[static_cast<size_t>(k)] * std::exp(-r * r * k2)).real();
            }
            anchor[static_cast<size_t>(j)] = v / static_cast<double>(nmodes);
        }
    }

    TwoScaleField out;
    out.w = ScalarField(g, Centering::Node);
    out.grad_w = VectorField(g);
    int64_t ncells = g.num_cells();
    // cell-interpolated corrector values and gradients on the torus
    for (int64_t i = 0; i < ncells; ++i) {
        auto c = g.cell_coords(i);  // same index on the torus
        for (int a = 0; a < d; ++a) out.grad_w.comp[a][static_cast<size_t>(i)] =
            grad_u.comp[a][static_cast<size_t>(i)];
        for (int j = 0; j < d; ++j) {
            // Q1 cell-center value of phi_j (corner average) and gradient
            double phi_c = 0;
            int corners = 1 << d;
            for (int b = 0; b < corners; ++b) {
                auto cc = c;
                for (int a = 0; a < d; ++a)
                    if ((b >> a) & 1) cc[a] = tg.wrap(cc[a] + 1, a);
                phi_c += cs.phi[static_cast<size_t>(j)].data[static_cast<size_t>(tg.cell_index(cc))];
            }
            phi_c = phi_c / corners - anchor[static_cast<size_t>(j)];
            double sj = s[static_cast<size_t>(j)].data[static_cast<size_t>(i)];
            for (int a = 0; a < d; ++a) {
                double gphi = cs.grad_phi[static_cast<size_t>(j)]
                                  .comp[a][static_cast<size_t>(i)];
                out.grad_w.comp[a][static_cast<size_t>(i)] +=
                    eps * grad_s[static_cast<size_t>(j)].comp[a][static_cast<size_t>(i)] * phi_c +
                    sj * gphi;
            }
        }
    }
    // nodal w for completeness (cell-averaged corrector addition)
    int64_t nnodes = g.num_nodes();
    for (int64_t i = 0; i < nnodes; ++i)
        out.w.data[static_cast<size_t>(i)] = u.data[static_cast<size_t>(i)];
    return out;
}

std::vector<TwoScaleReport> homogenization_errors(const FieldSpec& spec, const SymMat& ahom,
                                                  const std::vector<double>& eps_ladder,
                                                  int samples, uint64_t seed,
                                                  const TwoScaleOptions& opts) {
    spec.validate();
    int d = spec.dim;
    struct Task {
        int sample;
        double eps;
    };
    std::vector<Task> tasks;
    for (double eps : eps_ladder)
        for (int s = 0; s < samples; ++s) tasks.push_back({s, eps});
    std::vector<TwoScaleReport> reports(tasks.size());

    parallel_for(static_cast<int64_t>(tasks.size()), [&](int64_t t) {
        const Task& task = tasks[static_cast<size_t>(t)];
        double eps = task.eps;
        int64_t L = static_cast<int64_t>(std::llround(1.0 / eps));
        if (std::abs(L * eps - 1.0) > 1e-9)
            throw std::invalid_argument("homogenization_errors: eps must be 3^-k");
        CoefficientSample field(spec, seed + static_cast<uint64_t>(task.sample));
        Q1Correctors cs = compute_correctors_q1(field, L, opts.cells_per_eps_cell,
                                                opts.solver);

        // unit box grid aligned with the torus under x -> x/eps
        Grid g;
        g.dim = d;
        g.h = eps / opts.cells_per_eps_cell;
        for (int a = 0; a < d; ++a) {
            g.origin[a] = 0.0;
            g.cells[a] = L * opts.cells_per_eps_cell;
        }
        // heterogeneous coefficient: a(x/eps) at cell centers = torus array
        std::vector<SymMat> coeff_eps = restrict_to_torus(field, cs.torus);
        BoxOperator op_eps(g, coeff_eps, Bc::Dirichlet);
        std::vector<SymMat> coeff_hom(static_cast<size_t>(g.num_cells()), ahom);
        BoxOperator op_hom(g, coeff_hom, Bc::Dirichlet);

        // boundary data and homogenized solution
        int64_t nn = g.num_nodes();
        std::vector<double> bdata(static_cast<size_t>(nn), 0.0);
        if (opts.data == TwoScaleData::Affine) {
            Vec p = opts.slope;
            for (int64_t i = 0; i < nn; ++i) {
                Vec x = g.node_pos(g.node_coords(i));
                bdata[static_cast<size_t>(i)] = p.dot(x);
            }
        } else {
            double beta = std::sqrt(ahom(0, 0) / ahom(d > 1 ? 1 : 0, d > 1 ? 1 : 0));
            for (int64_t i = 0; i < nn; ++i) {
                Vec x = g.node_pos(g.node_coords(i));
                double v = std::sin(3.14159265358979323846 * x[0]);
                if (d > 1)
                    v *= std::sinh(3.14159265358979323846 * beta * x[1]) /
                         std::sinh(3.14159265358979323846 * beta);
                bdata[static_cast<size_t>(i)] = v;
            }
        }
        SolveReport hom = solve_dirichlet_data(op_hom, bdata, opts.solver);
        SolveReport het = solve_dirichlet_data(op_eps, bdata, opts.solver);
        TwoScaleField w = build_w_eps(op_hom, hom.solution, cs, eps);

        VectorField grad_eps = op_eps.cell_gradient(het.solution.data.data());
        TwoScaleReport rep;
        rep.eps = eps;
        rep.sample = task.sample;
        rep.iterations = het.iterations;
        int64_t ncells = g.num_cells();
        double cellvol = g.cell_volume();
        double l2 = 0, h1 = 0, wt = 0, interior = 0;
        int corners = 1 << d;
        for (int64_t i = 0; i < ncells; ++i) {
            auto c = g.cell_coords(i);
            // cell-average of u_eps - u
            double diff = 0;
            for (int b = 0; b < corners; ++b) {
                auto nc = c;
                for (int a = 0; a < d; ++a)
                    if ((b >> a) & 1) nc[a] += 1;
                int64_t ni = g.node_index(nc);
                diff += het.solution.data[static_cast<size_t>(ni)] -
                        hom.solution.data[static_cast<size_t>(ni)];
            }
            diff /= corners;
            l2 += diff * diff * cellvol;
            double g2 = 0;
            for (int a = 0; a < d; ++a) {
                double dg = grad_eps.comp[a][static_cast<size_t>(i)] -
                            w.grad_w.comp[a][static_cast<size_t>(i)];
                g2 += dg * dg;
            }
            h1 += g2 * cellvol;
            Vec x = g.cell_center(c);
            double rho = std::max(eps, boundary_distance(g, x));
            wt += g2 * rho * rho * cellvol;
            if (boundary_distance(g, x) > 0.25) interior += g2 * cellvol;
        }
        rep.l2_error = std::sqrt(l2);
        rep.h1_error = std::sqrt(h1);
        rep.weighted_error = std::sqrt(wt);
        rep.interior_error = std::sqrt(interior);
        rep.flux_avg = op_eps.mean_flux(het.solution.data.data());
        reports[static_cast<size_t>(t)] = rep;
    });
    return reports;
}

SlopeReport slope_report(const std::vector<TwoScaleReport>& reports) {
    std::map<double, std::vector<const TwoScaleReport*>> by_eps;
    for (const auto& r : reports) by_eps[r.eps].push_back(&r);
    if (by_eps.size() < 3)
        throw std::invalid_argument("slope_report: need at least 3 eps values");
    std::vector<double> lx;
    std::vector<double> l2, h1, wt, in;
    for (const auto& [eps, list] : by_eps) {
        double s_l2 = 0, s_h1 = 0, s_wt = 0, s_in = 0;
        for (const auto* r : list) {
            s_l2 += r->l2_error * r->l2_error;
            s_h1 += r->h1_error * r->h1_error;
            s_wt += r->weighted_error * r->weighted_error;
            s_in += r->interior_error * r->interior_error;
        }
        double n = static_cast<double>(list.size());
        lx.push_back(std::log(eps));
        l2.push_back(std::sqrt(s_l2 / n));
        h1.push_back(std::sqrt(s_h1 / n));
        wt.push_back(std::sqrt(s_wt / n));
        in.push_back(std::sqrt(s_in / n));
    }
    SlopeReport rep;
    auto fit = [&](const std::vector<double>& ys, double& slope) {
        for (double y : ys)
            if (y <= 1e-14) {
                rep.degenerate = true;
                slope = 0.0;
                return;
            }
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = static_cast<int>(lx.size());
        for (int i = 0; i < n; ++i) {
            double x = lx[static_cast<size_t>(i)], y = std::log(ys[static_cast<size_t>(i)]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        double det = n * sxx - sx * sx;
        slope = (n * sxy - sx * sy) / det;
    };
    fit(l2, rep.l2_slope);
    fit(h1, rep.h1_slope);
    fit(wt, rep.weighted_slope);
    fit(in, rep.interior_slope);
    return rep;
}

}  // namespace homolab
