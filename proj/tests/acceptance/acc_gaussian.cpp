// Criteria 10-12: white noise exactness, GFF identities, and Gaussianity of
// rescaled corrector functionals.
#include "acceptance_common.hpp"

#include <cmath>

#include "homolab/analysis.hpp"
#include "homolab/corrector.hpp"
#include "homolab/gaussian.hpp"
#include "homolab/parallel.hpp"
#include "oracles.hpp"

using namespace homolab;
using namespace acceptance;

TEST_CASE("C10 white noise construction is exact") {
    // (a) variance identity at native resolution, machine precision
    bool variance_ok = true;
    HashKey key(10);
    for (int trial = 0; trial < 8; ++trial) {
        DyadicFn f;
        f.dim = 2;
        f.level = 2;
        f.lo = {-2, 0, 0};
        f.hi = {2, 3, 1};
        f.values.resize(static_cast<size_t>(f.num_cells()));
        for (size_t i = 0; i < f.values.size(); ++i)
            f.values[i] = 2 * u01(key, static_cast<uint64_t>(trial) * 4096 + i) - 1;
        WhiteNoise w(2, 3, 1.0, 4242);
        double a = w.variance_exact(f);
        double b = w.variance_cell_formula(f);
        if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(b))) variance_ok = false;
    }

    // (b) independence for disjoint dyadic supports over 1e4 seeds
    DyadicFn fa = DyadicFn::cell_indicator(2, 1, {0, 0, 0});
    DyadicFn fb = DyadicFn::cell_indicator(2, 1, {4, 3, 0});
    int N = 10000;
    double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
    for (int i = 0; i < N; ++i) {
        WhiteNoise w(2, 3, 1.0, 100000 + static_cast<uint64_t>(i));
        double a = w.evaluate(fa), b = w.evaluate(fb);
        sa += a;
        sb += b;
        sab += a * b;
        saa += a * a;
        sbb += b * b;
    }
    double n = N;
    double corr = (sab / n - sa / n * sb / n) /
                  std::sqrt((saa / n - sa / n * sa / n) * (sbb / n - sb / n * sb / n));
    bool indep_ok = std::abs(corr) <= 3.0 / std::sqrt(n);

    // (c) scaling exponent -d/2 in d = 1 and d = 2
    ScalingReport s1 = scaling_check(1, 2, {1.0, 2.0, 4.0, 8.0}, 10000, 77);
    ScalingReport s2 = scaling_check(2, 2, {1.0, 2.0, 4.0}, 10000, 78);
    bool scaling_ok = std::abs(s1.slope + 0.5) <= 0.1 && std::abs(s2.slope + 1.0) <= 0.1;
    std::printf("  corr %.4f (band %.4f); scaling slopes d=1: %.3f, d=2: %.3f\n", corr,
                3.0 / std::sqrt(n), s1.slope, s2.slope);
    report(10, "white noise: exact variance, independence, scaling exponent -d/2",
           variance_ok && indep_ok && scaling_ok);
}

TEST_CASE("C11 gradient gff identities") {
    Grid torus = Grid::torus(2, 32, 1);
    SymMat ahom = SymMat::identity(2, 2.0);
    SymMat Q = SymMat::identity(2, 1.0);
    GradientGff gff(torus, ahom, Q);
    int64_t n = torus.num_cells();

    // (a) divergence-free fields evaluate to zero (via the projector)
    HashKey key(11);
    ScalarField psi(torus, Centering::Cell);
    for (int64_t i = 0; i < n; ++i) psi.data[static_cast<size_t>(i)] = normal(key, static_cast<uint64_t>(i));
    VectorField sol(torus, true);
    for (int64_t i = 0; i < n; ++i) {
        auto c = torus.cell_coords(i);
        auto cm2 = c, cm1 = c;
        cm2[1] = torus.wrap(cm2[1] - 1, 1);
        cm1[0] = torus.wrap(cm1[0] - 1, 0);
        sol.comp[0][static_cast<size_t>(i)] =
            -(psi.data[static_cast<size_t>(i)] -
              psi.data[static_cast<size_t>(torus.cell_index(cm2))]) /
            torus.h;
        sol.comp[1][static_cast<size_t>(i)] =
            (psi.data[static_cast<size_t>(i)] -
             psi.data[static_cast<size_t>(torus.cell_index(cm1))]) /
            torus.h;
    }
    VectorField Psol = gff.project(sol);
    double scale = 0, worst = 0;
    for (int j = 0; j < 2; ++j)
        for (int64_t i = 0; i < n; ++i) {
            scale = std::max(scale, std::abs(sol.comp[j][static_cast<size_t>(i)]));
            worst = std::max(worst, std::abs(Psol.comp[j][static_cast<size_t>(i)]));
        }
    bool divfree_ok = worst <= 1e-8 * scale;

    // (b) Monte Carlo variance matches the deterministic formula at N = 1e4
    VectorField F(torus, true);
    for (int64_t i = 0; i < n; ++i) {
        auto c = torus.cell_coords(i);
        double x = (c[0] + 0.5) * torus.h / 32.0, y = (c[1] + 0.5) * torus.h / 32.0;
        F.comp[0][static_cast<size_t>(i)] = std::sin(2 * M_PI * x) + 0.2 * std::cos(2 * M_PI * y);
        F.comp[1][static_cast<size_t>(i)] = std::cos(2 * M_PI * (x + y));
    }
    double formula = gff.variance_formula(F);
    VectorField G = gff.project(F);
    int N = 10000;
    double hd = torus.h * torus.h;
    double s = 0, s2 = 0;
    for (int i = 0; i < N; ++i) {
        VectorField W = gff.sample_noise(777000 + static_cast<uint64_t>(i));
        double v = 0;
        for (int j = 0; j < 2; ++j)
            for (int64_t z = 0; z < n; ++z)
                v += W.comp[j][static_cast<size_t>(z)] * G.comp[j][static_cast<size_t>(z)];
        v *= hd;
        s += v;
        s2 += v * v;
    }
    double mc = s2 / N - (s / N) * (s / N);
    double band = 3.0 * formula * std::sqrt(2.0 / N);
    bool var_ok = std::abs(mc - formula) <= band;

    // (c) d=2 potential log-divergence: deterministic variances of dilated
    // bump differences grow linearly per doubling, within 30%
    Grid big = Grid::torus(2, 64, 1);
    GradientGff gff2(big, SymMat::identity(2), SymMat::identity(2));
    int64_t nb = big.num_cells();
    auto bump = [&](double r) {
        ScalarField f(big, Centering::Cell);
        for (int64_t i = 0; i < nb; ++i) {
            auto c = big.cell_coords(i);
            Vec x(2, {((c[0] + 0.5) * big.h - 32.0) / r, ((c[1] + 0.5) * big.h - 32.0) / r});
            f.data[static_cast<size_t>(i)] = standard_mollifier(2, x) / (r * r);
        }
        return f;
    };
    ScalarField f0 = bump(2.0);
    std::vector<double> ks, vars;
    for (int k = 1; k <= 4; ++k) {
        ScalarField fk = bump(2.0 * std::pow(2.0, k));
        ScalarField diff(big, Centering::Cell);
        for (int64_t i = 0; i < nb; ++i)
            diff.data[static_cast<size_t>(i)] =
                fk.data[static_cast<size_t>(i)] - f0.data[static_cast<size_t>(i)];
        diff.subtract_mean();
        VectorField Fd = gff2.divergence_potential(diff);
        ks.push_back(static_cast<double>(k));
        vars.push_back(gff2.variance_formula(Fd));
    }
    double slope = oracles::lsq_slope(ks, vars);
    bool log_ok = slope > 0;
    for (size_t i = 1; i < vars.size(); ++i) {
        double inc = vars[i] - vars[i - 1];
        if (std::abs(inc - slope) > 0.30 * slope) log_ok = false;
    }
    std::printf("  div-free sup %.2e; Var MC %.4f vs formula %.4f (band %.4f); log slope %.4f\n",
                worst / std::max(scale, 1e-300), mc, formula, band, slope);
    report(11, "gff: projector kernel, variance formula at 3 sigma, d=2 log divergence",
           divfree_ok && var_ok && log_ok);
}

TEST_CASE("C12 rescaled corrector functionals look gaussian") {
    FieldSpec spec = checkerboard_1_4();
    int64_t L = 32;
    double r = 8.0;  // largest feasible dilation on this torus
    int N = 256;
    CorrectorOptions opts;
    opts.cells_per_unit = 2;
    opts.compute_flux_correctors = false;
    std::vector<double> samples(static_cast<size_t>(N));
    parallel_for(N, [&](int64_t s) {
        CoefficientSample field(spec, 12000 + static_cast<uint64_t>(s));
        CorrectorSet cs = compute_correctors(field, L, opts);
        const Grid& g = cs.torus;
        int64_t n = g.num_cells();
        // F is a fixed smooth compactly supported vector field; the sample is
        // r^{d/2} int F(x) . grad phi_e(r x) dx = r^{-d/2} sum_y F(y/r) . grad phi(y) h^d
        double acc = 0;
        for (int64_t i = 0; i < n; ++i) {
            auto c = g.cell_coords(i);
            // cell-centered gradient of phi_1 from the staggered edges
            double gx = 0, gy = 0;
            {
                auto cm = c;
                cm[0] = g.wrap(cm[0] - 1, 0);
                gx = 0.5 * (cs.tilted[0].comp[0][static_cast<size_t>(i)] - 1.0 +
                            cs.tilted[0].comp[0][static_cast<size_t>(g.cell_index(cm))] - 1.0);
                auto cm2 = c;
                cm2[1] = g.wrap(cm2[1] - 1, 1);
                gy = 0.5 * (cs.tilted[0].comp[1][static_cast<size_t>(i)] +
                            cs.tilted[0].comp[1][static_cast<size_t>(g.cell_index(cm2))]);
            }
            Vec x(2, {((c[0] + 0.5) * g.h - 16.0) / r, ((c[1] + 0.5) * g.h - 16.0) / r});
            if (x.dot(x) >= 1.0) continue;
            double fx = standard_mollifier(2, x);
            Vec half = x;
            half[0] -= 0.25;
            double fy = 0.5 * standard_mollifier(2, half);
            acc += (fx * gx + fy * gy) * g.h * g.h;
        }
        samples[static_cast<size_t>(s)] = acc / r;  // r^{-d/2} with d = 2
    });
    GaussianityReport rep = gaussianity_test(samples);
    std::printf("  skew %.3f (band %.3f), ex-kurt %.3f (band %.3f), KS %.3f\n", rep.skewness,
                rep.skew_band, rep.excess_kurtosis, rep.kurt_band, rep.ks_statistic);
    report(12, "rescaled corrector functionals pass the moment bands at N=256", rep.pass);
}
