#include "homolab/corrector.hpp"

#include <cmath>
#include <complex>

#include "homolab/parallel.hpp"

namespace homolab {

namespace {

// least squares slope/intercept of y against x
void fit_line(const std::vector<double>& x, const std::vector<double>& y, double& slope,
              double& intercept) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = static_cast<int>(x.size());
    for (int i = 0; i < n; ++i) {
        sx += x[static_cast<size_t>(i)];
        sy += y[static_cast<size_t>(i)];
        sxx += x[static_cast<size_t>(i)] * x[static_cast<size_t>(i)];
        sxy += x[static_cast<size_t>(i)] * y[static_cast<size_t>(i)];
    }
    double det = n * sxx - sx * sx;
    slope = (n * sxy - sx * sy) / det;
    intercept = (sy - slope * sx) / n;
}

}  // namespace

CorrectorSet compute_correctors(const CoefficientSample& field, int64_t L,
                                const CorrectorOptions& opts) {
    int d = field.dim();
    Grid torus = Grid::torus(d, L, opts.cells_per_unit);
    std::vector<SymMat> coeff = restrict_to_torus(field, torus);
    TorusOperator op(torus, coeff);

    CorrectorSet cs;
    cs.torus = torus;
    cs.L = L;
    cs.cells_per_unit = opts.cells_per_unit;
    cs.ahom_per = SymMat(d);
    cs.phi.resize(static_cast<size_t>(d));
    cs.tilted.resize(static_cast<size_t>(d));
    cs.flux.resize(static_cast<size_t>(d));
    int64_t n = torus.num_cells();

    for (int j = 0; j < d; ++j) {
        SolveReport rep = solve_periodic_cell(op, Vec::unit(d, j), opts.solver);
        cs.iterations.push_back(rep.iterations);
        cs.residuals.push_back(rep.relative_residual);
        cs.phi[static_cast<size_t>(j)] = rep.solution;
        VectorField X = op.gradient(rep.solution.data.data());
        for (int c = 0; c < d; ++c)
            for (int64_t i = 0; i < n; ++i)
                X.comp[c][static_cast<size_t>(i)] += (c == j) ? 1.0 : 0.0;
        VectorField Y(torus, true);
        for (int c = 0; c < d; ++c)
            for (int64_t i = 0; i < n; ++i)
                Y.comp[c][static_cast<size_t>(i)] =
                    coeff[static_cast<size_t>(i)](c, c) * X.comp[c][static_cast<size_t>(i)];
        Vec mean_flux = Y.mean();
        for (int c = 0; c < d; ++c) cs.ahom_per(c, j) = mean_flux[c];
        cs.tilted[static_cast<size_t>(j)] = std::move(X);
        cs.flux[static_cast<size_t>(j)] = std::move(Y);
    }
    cs.ahom_per = cs.ahom_per.symmetrized();

    if (opts.compute_flux_correctors) {
        // S_{e,il} from the spectral vector-potential solve in the staggered
        // calculus: -Lap S_il = D+_i g_l - D+_l g_i, with g the mean-free
        // flux. With this choice sum_l D-_l S_il = g_i exactly.
        TorusFft fft(torus);
        cs.S.resize(static_cast<size_t>(d));
        std::vector<std::vector<std::complex<double>>> ghat(
            static_cast<size_t>(d),
            std::vector<std::complex<double>>(static_cast<size_t>(n)));
        for (int e = 0; e < d; ++e) {
            cs.S[static_cast<size_t>(e)].assign(static_cast<size_t>(d * d),
                                                ScalarField(torus, Centering::Cell));
            Vec mean_flux(d);
            for (int c = 0; c < d; ++c) {
                double m = 0;
                for (int64_t i = 0; i < n; ++i)
                    m += cs.flux[static_cast<size_t>(e)].comp[c][static_cast<size_t>(i)];
                mean_flux[c] = m / static_cast<double>(n);
            }
            std::vector<double> tmp(static_cast<size_t>(n));
            for (int c = 0; c < d; ++c) {
                for (int64_t i = 0; i < n; ++i)
                    tmp[static_cast<size_t>(i)] =
                        cs.flux[static_cast<size_t>(e)].comp[c][static_cast<size_t>(i)] -
                        mean_flux[c];
                fft.forward(tmp.data(), ghat[static_cast<size_t>(c)].data());
            }
            std::vector<std::complex<double>> shat(static_cast<size_t>(n));
            for (int i = 0; i < d; ++i) {
                for (int l = i + 1; l < d; ++l) {
                    for (int64_t k = 0; k < n; ++k) {
                        auto th = fft.angles(k);
                        std::complex<double> di = TorusFft::d_plus(th[i], torus.h);
                        std::complex<double> dl = TorusFft::d_plus(th[l], torus.h);
                        double lap = 0;
                        for (int a = 0; a < d; ++a)
                            lap += std::norm(TorusFft::d_plus(th[a], torus.h));
                        shat[static_cast<size_t>(k)] =
                            (lap > 1e-14)
                                ? (di * ghat[static_cast<size_t>(l)][static_cast<size_t>(k)] -
                                   dl * ghat[static_cast<size_t>(i)][static_cast<size_t>(k)]) /
                                      lap
                                : std::complex<double>(0, 0);
                    }
                    ScalarField s_il(torus, Centering::Cell);
                    fft.backward(shat.data(), s_il.data.data());
                    for (int64_t idx = 0; idx < n; ++idx) {
                        double v = s_il.data[static_cast<size_t>(idx)];
                        cs.S[static_cast<size_t>(e)][static_cast<size_t>(i * d + l)]
                            .data[static_cast<size_t>(idx)] = v;
                        cs.S[static_cast<size_t>(e)][static_cast<size_t>(l * d + i)]
                            .data[static_cast<size_t>(idx)] = -v;
                    }
                }
            }
        }
    }
    return cs;
}

double flux_identity_residual(const CorrectorSet& cs) {
    int d = cs.dim();
    const Grid& g = cs.torus;
    int64_t n = g.num_cells();
    double h = g.h;
    double worst = 0;
    for (int e = 0; e < d; ++e) {
        double num2 = 0, den2 = 0;
        for (int i = 0; i < d; ++i) {
            Vec ahom_e(d);
            for (int c = 0; c < d; ++c) ahom_e[c] = cs.ahom_per(c, e);
            for (int64_t z = 0; z < n; ++z) {
                double div = 0;
                for (int l = 0; l < d; ++l) {
                    if (l == i) continue;
                    const auto& s = cs.s_component(e, i, l);
                    auto cz = g.cell_coords(z);
                    auto cm = cz;
                    cm[l] = g.wrap(cm[l] - 1, l);
                    div += (s.data[static_cast<size_t>(z)] -
                            s.data[static_cast<size_t>(g.cell_index(cm))]) /
                           h;
                }
                double target =
                    cs.flux[static_cast<size_t>(e)].comp[i][static_cast<size_t>(z)] - ahom_e[i];
                num2 += (div - target) * (div - target);
                den2 += cs.flux[static_cast<size_t>(e)].comp[i][static_cast<size_t>(z)] *
                        cs.flux[static_cast<size_t>(e)].comp[i][static_cast<size_t>(z)];
            }
        }
        worst = std::max(worst, std::sqrt(num2 / std::max(den2, 1e-300)));
    }
    return worst;
}

std::vector<double> corrector_doubling_gap(const CoefficientSample& field, int64_t L,
                                           const CorrectorOptions& opts) {
    CorrectorOptions local = opts;
    local.compute_flux_correctors = false;
    CorrectorSet small = compute_correctors(field, L, local);
    CorrectorSet big = compute_correctors(field, 2 * L, local);
    int d = field.dim();
    const Grid& gb = big.torus;
    const Grid& gs = small.torus;
    int64_t n = gb.num_cells();
    std::vector<double> gaps;
    for (int j = 0; j < d; ++j) {
        double num = 0, den = 0;
        for (int64_t i = 0; i < n; ++i) {
            auto cb = gb.cell_coords(i);
            std::array<int64_t, kMaxDim> cs_idx{0, 0, 0};
            for (int a = 0; a < d; ++a) cs_idx[a] = cb[a] % gs.cells[a];
            int64_t si = gs.cell_index(cs_idx);
            for (int c = 0; c < d; ++c) {
                double vb = big.tilted[static_cast<size_t>(j)].comp[c][static_cast<size_t>(i)];
                double vs =
                    small.tilted[static_cast<size_t>(j)].comp[c][static_cast<size_t>(si)];
                num += (vb - vs) * (vb - vs);
                den += vb * vb;
            }
        }
        gaps.push_back(std::sqrt(num / std::max(den, 1e-300)));
    }
    return gaps;
}

HeatDecayReport heat_average_decay(const FieldSpec& spec, int direction,
                                   const std::vector<double>& scales, int n_samples,
                                   int64_t L, uint64_t seed, const CorrectorOptions& opts) {
    int d = spec.dim;
    size_t nr = scales.size();
    // per sample and scale: |masked grad|, masked flux vector, masked energy
    std::vector<std::vector<double>> grad_val(static_cast<size_t>(n_samples)),
        energy_val(static_cast<size_t>(n_samples));
    std::vector<std::vector<Vec>> flux_val(static_cast<size_t>(n_samples));
    std::vector<SymMat> ahom_samples(static_cast<size_t>(n_samples));

    CorrectorOptions local = opts;
    local.compute_flux_correctors = false;

    parallel_for(n_samples, [&](int64_t s) {
        CoefficientSample field(spec, seed + static_cast<uint64_t>(s));
        CorrectorSet cs = compute_correctors(field, L, local);
        ahom_samples[static_cast<size_t>(s)] = cs.ahom_per;
        const Grid& g = cs.torus;
        TorusFft fft(g);
        int64_t n = g.num_cells();
        // forward transforms of grad components, flux components, energy density
        std::vector<std::vector<std::complex<double>>> hats;
        std::vector<double> tmp(static_cast<size_t>(n));
        for (int c = 0; c < d; ++c) {
            for (int64_t i = 0; i < n; ++i)
                tmp[static_cast<size_t>(i)] =
                    cs.tilted[static_cast<size_t>(direction)].comp[c][static_cast<size_t>(i)] -
                    ((c == direction) ? 1.0 : 0.0);
            hats.emplace_back(static_cast<size_t>(n));
            fft.forward(tmp.data(), hats.back().data());
        }
        for (int c = 0; c < d; ++c) {
            hats.emplace_back(static_cast<size_t>(n));
            fft.forward(cs.flux[static_cast<size_t>(direction)].comp[c].data(),
                        hats.back().data());
        }
        {
            // energy density per site: 1/2 sum_j a_jj X_j^2
            std::vector<SymMat> coeff = restrict_to_torus(field, g);
            for (int64_t i = 0; i < n; ++i) {
                double e = 0;
                for (int c = 0; c < d; ++c) {
                    double x =
                        cs.tilted[static_cast<size_t>(direction)].comp[c][static_cast<size_t>(i)];
                    e += coeff[static_cast<size_t>(i)](c, c) * x * x;
                }
                tmp[static_cast<size_t>(i)] = 0.5 * e;
            }
            hats.emplace_back(static_cast<size_t>(n));
            fft.forward(tmp.data(), hats.back().data());
        }
        // masked value at 0 for each scale: (1/N) sum_k hat(k) exp(-r^2|kappa|^2)
        grad_val[static_cast<size_t>(s)].resize(nr);
        flux_val[static_cast<size_t>(s)].resize(nr);
        energy_val[static_cast<size_t>(s)].resize(nr);
        for (size_t ri = 0; ri < nr; ++ri) {
            double r = scales[ri];
            std::vector<double> vals(hats.size(), 0.0);
            for (int64_t k = 0; k < n; ++k) {
                auto kap = fft.continuum_freq(k);
                double k2 = 0;
                for (int a = 0; a < d; ++a) k2 += kap[a] * kap[a];
                double w = std::exp(-r * r * k2);
                if (w < 1e-300) continue;
                for (size_t hidx = 0; hidx < hats.size(); ++hidx)
                    vals[hidx] += (hats[hidx][static_cast<size_t>(k)] * w).real();
            }
            for (double& v : vals) v /= static_cast<double>(n);
            double g2 = 0;
            for (int c = 0; c < d; ++c) g2 += vals[static_cast<size_t>(c)] * vals[static_cast<size_t>(c)];
            grad_val[static_cast<size_t>(s)][ri] = std::sqrt(g2);
            Vec fl(d);
            for (int c = 0; c < d; ++c) fl[c] = vals[static_cast<size_t>(d + c)];
            flux_val[static_cast<size_t>(s)][ri] = fl;
            energy_val[static_cast<size_t>(s)][ri] = vals[static_cast<size_t>(2 * d)];
        }
    });

    HeatDecayReport rep;
    SymMat pooled(d);
    for (const auto& m : ahom_samples) pooled = pooled + m;
    pooled = pooled * (1.0 / n_samples);
    rep.ahom_pooled = pooled;
    Vec ahom_e(d);
    for (int c = 0; c < d; ++c) ahom_e[c] = pooled(c, direction);
    double eval_ref = 0.5 * pooled(direction, direction);

    auto fill = [&](DecayDiagnostic& diag, auto&& value_of) {
        diag.scales.assign(scales.begin(), scales.end());
        diag.rms.resize(nr);
        for (size_t ri = 0; ri < nr; ++ri) {
            double s2 = 0;
            for (int s = 0; s < n_samples; ++s) {
                double v = value_of(static_cast<size_t>(s), ri);
                s2 += v * v;
            }
            diag.rms[ri] = std::sqrt(s2 / n_samples);
        }
        std::vector<double> lx(nr), ly(nr);
        for (size_t ri = 0; ri < nr; ++ri) {
            lx[ri] = std::log(scales[ri]);
            ly[ri] = std::log(std::max(diag.rms[ri], 1e-300));
        }
        fit_line(lx, ly, diag.slope, diag.intercept);
    };
    fill(rep.gradient, [&](size_t s, size_t ri) { return grad_val[s][ri]; });
    fill(rep.flux, [&](size_t s, size_t ri) {
        Vec diff = flux_val[s][ri] - ahom_e;
        return diff.norm();
    });
    fill(rep.energy, [&](size_t s, size_t ri) { return energy_val[s][ri] - eval_ref; });
    return rep;
}

GrowthTable sublinearity_profile(const CorrectorSet& cs, int direction,
                                 const std::vector<double>& scales) {
    const Grid& g = cs.torus;
    int64_t n = g.num_cells();
    const ScalarField& phi = cs.phi[static_cast<size_t>(direction)];
    TorusFft fft(g);
    std::vector<std::complex<double>> hat(static_cast<size_t>(n));
    fft.forward(phi.data.data(), hat.data());

    GrowthTable table;
    table.scales = scales;
    for (double r : scales) {
        // anchor: (phi * Phi_r)(0)
        double anchor = 0;
        for (int64_t k = 0; k < n; ++k) {
            auto kap = fft.continuum_freq(k);
            double k2 = 0;
            for (int a = 0; a < g.dim; ++a) k2 += kap[a] * kap[a];
            anchor += (hat[static_cast<size_t>(k)] * std::exp(-r * r * k2)).real();
        }
        anchor /= static_cast<double>(n);
        // L2 mean over the ball B_r around site 0 (torus wrap distance)
        double s2 = 0;
        int64_t count = 0;
        for (int64_t i = 0; i < n; ++i) {
            auto c = g.cell_coords(i);
            double d2 = 0;
            for (int a = 0; a < g.dim; ++a) {
                double x = c[a] * g.h;
                double Ls = g.side_length(a);
                x -= Ls * std::nearbyint(x / Ls);
                d2 += x * x;
            }
            if (d2 <= r * r) {
                double v = phi.data[static_cast<size_t>(i)] - anchor;
                s2 += v * v;
                ++count;
            }
        }
        table.values.push_back(count > 0 ? std::sqrt(s2 / count) : 0.0);
    }
    if (scales.size() >= 2) {
        std::vector<double> x, y;
        for (size_t i = 0; i < scales.size(); ++i) {
            x.push_back(std::sqrt(std::log(scales[i])));
            y.push_back(table.values[i]);
        }
        double b;
        fit_line(x, y, table.slope_vs_sqrtlog, b);
    }
    return table;
}

LipschitzProfile lipschitz_profile(const CoefficientSample& field, double R, uint64_t data_seed,
                                   double c0, const CorrectorOptions& opts) {
    int d = field.dim();
    // box [-R, R]^d
    Grid g;
    g.dim = d;
    g.h = 1.0 / opts.cells_per_unit;
    for (int a = 0; a < d; ++a) {
        g.origin[a] = -R;
        g.cells[a] = static_cast<int64_t>(std::llround(2 * R * opts.cells_per_unit));
    }
    BoxOperator op(g, restrict_to_grid(field, g), Bc::Dirichlet);
    // random smooth boundary data: low-order random trigonometric polynomial
    HashKey key(data_seed);
    int64_t nn = g.num_nodes();
    std::vector<double> bdata(static_cast<size_t>(nn), 0.0);
    struct Mode {
        double c;
        double phase;
        std::array<int, kMaxDim> m;
    };
    std::vector<Mode> modes;
    uint64_t ctr = 0;
    std::array<int, kMaxDim> m{0, 0, 0};
    for (m[0] = -2; m[0] <= 2; ++m[0]) {
        for (m[1] = (d > 1 ? -2 : 0); m[1] <= (d > 1 ? 2 : 0); ++m[1]) {
            for (m[2] = (d > 2 ? -2 : 0); m[2] <= (d > 2 ? 2 : 0); ++m[2]) {
                int norm2 = m[0] * m[0] + m[1] * m[1] + m[2] * m[2];
                if (norm2 == 0) continue;
                Mode mode;
                mode.m = m;
                mode.c = normal(key, ctr++) / norm2;
                mode.phase = 6.283185307179586 * u01(key, 1000000 + ctr);
                modes.push_back(mode);
            }
        }
    }
    for (int64_t i = 0; i < nn; ++i) {
        auto nc = g.node_coords(i);
        Vec x = g.node_pos(nc);
        double v = 0;
        for (const auto& mode : modes) {
            double ph = mode.phase;
            for (int a = 0; a < d; ++a)
                ph += 3.14159265358979323846 * mode.m[a] * x[a] / (2 * R);
            v += mode.c * std::cos(ph);
        }
        bdata[static_cast<size_t>(i)] = v;
    }
    SolveReport rep = solve_dirichlet_data(op, bdata, opts.solver);

    LipschitzProfile prof;
    double r = R;
    std::vector<double> radii;
    while (r >= 4 * g.h && r >= 1.0) {
        radii.push_back(r);
        r /= 2;
    }
    for (double rr : radii) {
        // mean and L2 over ball of radius rr at the box center (node-sampled)
        double sum = 0, count = 0;
        for (int64_t i = 0; i < nn; ++i) {
            auto nc = g.node_coords(i);
            Vec x = g.node_pos(nc);
            if (x.dot(x) <= rr * rr) {
                sum += rep.solution.data[static_cast<size_t>(i)];
                count += 1;
            }
        }
        double mean = sum / std::max(count, 1.0);
        double s2 = 0;
        for (int64_t i = 0; i < nn; ++i) {
            auto nc = g.node_coords(i);
            Vec x = g.node_pos(nc);
            if (x.dot(x) <= rr * rr) {
                double v = rep.solution.data[static_cast<size_t>(i)] - mean;
                s2 += v * v;
            }
        }
        prof.radii.push_back(rr);
        prof.values.push_back(std::sqrt(s2 / std::max(count, 1.0)) / rr);
    }
    // minimal scale: smallest radius from which the profile stays below
    // c0 * profile(R) all the way up to R
    double ref = prof.values.front() * c0;
    double minimal = prof.radii.front();
    for (size_t i = 0; i < prof.radii.size(); ++i) {
        if (prof.values[i] <= ref)
            minimal = prof.radii[i];
        else
            break;
    }
    prof.minimal_scale = minimal;
    return prof;
}

}  // namespace homolab
