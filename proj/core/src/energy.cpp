#include "homolab/energy.hpp"

#include <cmath>

#include "homolab/corrector.hpp"

namespace homolab {

namespace {

BoxOperator make_box_op(const CoefficientSample& field, const TriadicCube& cube,
                        const EnergyOptions& opts, Bc bc) {
    Grid g = Grid::cube_box(cube, opts.cells_per_unit);
    return BoxOperator(g, restrict_to_grid(field, g), bc);
}

}  // namespace

double nu(const CoefficientSample& field, const TriadicCube& cube, const Vec& p,
          const EnergyOptions& opts) {
    BoxOperator op = make_box_op(field, cube, opts, Bc::Dirichlet);
    return solve_dirichlet_affine(op, p, opts.solver).value;
}

double nu_star(const CoefficientSample& field, const TriadicCube& cube, const Vec& q,
               const EnergyOptions& opts) {
    BoxOperator op = make_box_op(field, cube, opts, Bc::Neumann);
    return solve_neumann_flux(op, q, opts.solver).value;
}

EnergyReport j_quantity(const CoefficientSample& field, const TriadicCube& cube, const Vec& p,
                        const Vec& q, const EnergyOptions& opts) {
    EnergyReport rep;
    rep.cube = cube;
    rep.p = p;
    rep.q = q;
    {
        BoxOperator op = make_box_op(field, cube, opts, Bc::Dirichlet);
        SolveReport s = solve_dirichlet_affine(op, p, opts.solver);
        rep.nu = s.value;
        rep.iterations_nu = s.iterations;
        rep.residual_nu = s.relative_residual;
        rep.grad_avg_dirichlet = op.mean_gradient(s.solution.data.data());
        rep.flux_avg_dirichlet = op.mean_flux(s.solution.data.data());
    }
    {
        BoxOperator op = make_box_op(field, cube, opts, Bc::Neumann);
        SolveReport s = solve_neumann_flux(op, q, opts.solver);
        rep.nu_star = s.value;
        rep.iterations_nu_star = s.iterations;
        rep.residual_nu_star = s.relative_residual;
        rep.grad_avg_neumann = op.mean_gradient(s.solution.data.data());
        rep.flux_avg_neumann = op.mean_flux(s.solution.data.data());
    }
    rep.j = rep.nu + rep.nu_star - p.dot(q);
    return rep;
}

QuadraticFormPair recover_quadratic_forms(const CoefficientSample& field,
                                          const TriadicCube& cube,
                                          const EnergyOptions& opts) {
    int d = field.dim();
    QuadraticFormPair out;
    out.a_U = SymMat(d);
    out.b_U = SymMat(d);

    // Reuse one operator per boundary condition across probe directions.
    BoxOperator opD = make_box_op(field, cube, opts, Bc::Dirichlet);
    BoxOperator opN = make_box_op(field, cube, opts, Bc::Neumann);
    auto eval_nu = [&](const Vec& p) { return solve_dirichlet_affine(opD, p, opts.solver).value; };
    auto eval_nu_star = [&](const Vec& q) { return solve_neumann_flux(opN, q, opts.solver).value; };

    auto recover = [&](auto&& eval, SymMat& m, double& resid) {
        std::vector<double> diag(static_cast<size_t>(d));
        for (int i = 0; i < d; ++i) {
            double v = eval(Vec::unit(d, i));
            m(i, i) = 2.0 * v;
            diag[static_cast<size_t>(i)] = v;
        }
        for (int i = 0; i < d; ++i) {
            for (int j = i + 1; j < d; ++j) {
                Vec plus = Vec::unit(d, i) + Vec::unit(d, j);
                Vec minus = Vec::unit(d, i) - Vec::unit(d, j);
                double vp = eval(plus);
                double vm = eval(minus);
                double off = 0.5 * (vp - vm);
                m(i, j) = off;
                m(j, i) = off;
                // quadraticity: vp + vm should equal 2(v_i + v_j)
                double rebuilt = diag[static_cast<size_t>(i)] + diag[static_cast<size_t>(j)];
                resid = std::max(resid, std::abs(0.5 * (vp + vm) - rebuilt) /
                                            std::max(1.0, std::abs(rebuilt)));
            }
        }
    };
    recover(eval_nu, out.a_U, out.residual_a);
    recover(eval_nu_star, out.b_U, out.residual_b);
    if (out.residual_a > 1e-8 || out.residual_b > 1e-8)
        throw std::runtime_error("recover_quadratic_forms: reconstruction residual above 1e-8");
    return out;
}

SubadditivityReport subadditivity_check(const CoefficientSample& field, const TriadicCube& cube,
                                        const Vec& p, const Vec& q, const EnergyOptions& opts) {
    if (cube.level < 1)
        throw std::invalid_argument("subadditivity_check: cube level must be >= 1");
    EnergyReport parent = j_quantity(field, cube, p, q, opts);
    auto children = subdivide(cube, cube.level - 1);
    double nu_sum = 0, j_sum = 0;
    for (const auto& child : children) {
        EnergyReport r = j_quantity(field, child, p, q, opts);
        nu_sum += r.nu;
        j_sum += r.j;
    }
    double w = 1.0 / static_cast<double>(children.size());
    SubadditivityReport rep;
    rep.slack_nu = nu_sum * w - parent.nu;
    rep.slack_j = j_sum * w - parent.j;
    return rep;
}

DerivativeResiduals derivative_identities_check(const CoefficientSample& field,
                                                const TriadicCube& cube, const Vec& p,
                                                const Vec& q, const EnergyOptions& opts,
                                                double fd_step) {
    int d = field.dim();
    DerivativeResiduals out;
    BoxOperator opD = make_box_op(field, cube, opts, Bc::Dirichlet);
    BoxOperator opN = make_box_op(field, cube, opts, Bc::Neumann);
    auto evalJ = [&](const Vec& pp, const Vec& qq) {
        double vnu = solve_dirichlet_affine(opD, pp, opts.solver).value;
        double vns = solve_neumann_flux(opN, qq, opts.solver).value;
        return vnu + vns - pp.dot(qq);
    };

    // Maximizer of J is (nu* maximizer) - (nu minimizer); its mean gradient
    // and mean flux give the analytic derivative formulas.
    SolveReport sD = solve_dirichlet_affine(opD, p, opts.solver);
    SolveReport sN = solve_neumann_flux(opN, q, opts.solver);
    Vec gradD = opD.mean_gradient(sD.solution.data.data());
    Vec fluxD = opD.mean_flux(sD.solution.data.data());
    Vec gradN = opN.mean_gradient(sN.solution.data.data());
    Vec fluxN = opN.mean_flux(sN.solution.data.data());
    Vec grad_v = gradN - gradD;  // mean gradient of the J maximizer
    Vec flux_v = fluxN - fluxD;

    for (int i = 0; i < d; ++i) {
        Vec dp = Vec::unit(d, i) * fd_step;
        double plus = evalJ(p + dp, q);
        double minus = evalJ(p - dp, q);
        double fd = (plus - minus) / (2 * fd_step);
        out.dJ_dp = std::max(out.dJ_dp, std::abs(fd + flux_v[i]));
        Vec dq = Vec::unit(d, i) * fd_step;
        plus = evalJ(p, q + dq);
        minus = evalJ(p, q - dq);
        fd = (plus - minus) / (2 * fd_step);
        out.dJ_dq = std::max(out.dJ_dq, std::abs(fd - grad_v[i]));
    }

    // flux identity: grad_p nu(p) = mean flux of the nu minimizer
    for (int i = 0; i < d; ++i) {
        Vec dp = Vec::unit(d, i) * fd_step;
        double plus = solve_dirichlet_affine(opD, p + dp, opts.solver).value;
        double minus = solve_dirichlet_affine(opD, p - dp, opts.solver).value;
        double fd = (plus - minus) / (2 * fd_step);
        out.flux_identity = std::max(out.flux_identity, std::abs(fd - fluxD[i]));
    }

    // quadratic response around the Dirichlet minimizer
    {
        const Grid& g = opD.grid();
        int64_t nn = g.num_nodes();
        std::vector<double> w(static_cast<size_t>(nn), 0.0);
        HashKey key(field.seed() ^ 0x9d7f3a2cULL);
        for (int64_t i = 0; i < nn; ++i) {
            auto nc = g.node_coords(i);
            if (!opD.is_boundary_node(nc))
                w[static_cast<size_t>(i)] = 0.3 * (u01(key, static_cast<uint64_t>(i)) - 0.5);
        }
        std::vector<double> cand(static_cast<size_t>(nn));
        for (int64_t i = 0; i < nn; ++i)
            cand[static_cast<size_t>(i)] =
                sD.solution.data[static_cast<size_t>(i)] + w[static_cast<size_t>(i)];
        double vol = g.box_volume();
        double e_cand = opD.energy(cand.data()) / vol;
        double gap = e_cand - sD.value;
        // 1/2 ||grad(w)||^2 with the identity coefficient
        BoxOperator id_op(g, std::vector<SymMat>(static_cast<size_t>(g.num_cells()),
                                                 SymMat::identity(g.dim)),
                          Bc::Dirichlet);
        double half_l2 = id_op.energy(w.data()) / vol;
        double lambda = field.spec().lambda;
        out.quad_response_low = std::max(0.0, half_l2 - gap);
        out.quad_response_high = std::max(0.0, gap - lambda * half_l2);
    }
    return out;
}

double j1_mask(const CorrectorSet& cs, const HeatKernelMask& mask, const Vec& p, const Vec& q) {
    int d = cs.dim();
    if (!mask.grid.same_geometry(cs.torus))
        throw std::invalid_argument("j1_mask: mask and corrector grids differ");
    // Quadratic data over the corrector span:
    //   M_jl = int_mask X_j . a X_l,  N_jl = int_mask (a X_l)_j,
    //   T_jl = int_mask (X_l)_j  with X_j = e_j + grad phi_j.
    SymMat M(d);
    double N[kMaxDim][kMaxDim] = {};
    double T[kMaxDim][kMaxDim] = {};
    int64_t n = cs.torus.num_cells();
    double cellvol = cs.torus.cell_volume();
    for (int64_t i = 0; i < n; ++i) {
        double w = mask.weights[static_cast<size_t>(i)] * cellvol;
        if (w == 0.0) continue;
        for (int l = 0; l < d; ++l) {
            for (int jcomp = 0; jcomp < d; ++jcomp) {
                double x = cs.tilted[static_cast<size_t>(l)].comp[jcomp][static_cast<size_t>(i)];
                double y = cs.flux[static_cast<size_t>(l)].comp[jcomp][static_cast<size_t>(i)];
                T[jcomp][l] += w * x;
                N[jcomp][l] += w * y;
            }
        }
        for (int j = 0; j < d; ++j)
            for (int l = j; l < d; ++l) {
                double s = 0;
                for (int c = 0; c < d; ++c)
                    s += cs.tilted[static_cast<size_t>(j)].comp[c][static_cast<size_t>(i)] *
                         cs.flux[static_cast<size_t>(l)].comp[c][static_cast<size_t>(i)];
                M(j, l) += w * s;
                if (l != j) M(l, j) += w * s;
            }
    }
    if (std::abs(M.det()) < 1e-12)
        throw std::runtime_error("j1_mask: degenerate optimality system");
    // maximize -1/2 xi.M xi + (T^t q - N^t p) . xi
    Vec rhs(d);
    for (int j = 0; j < d; ++j) {
        double s = 0;
        for (int c = 0; c < d; ++c) s += T[c][j] * q[c] - N[c][j] * p[c];
        rhs[j] = s;
    }
    Vec xi = solve_small(M, rhs);
    return 0.5 * rhs.dot(xi);
}

}  // namespace homolab
