#include <doctest.h>

#include <cmath>

#include "homolab/gaussian.hpp"
#include "oracles.hpp"

using namespace homolab;

TEST_CASE("unit-box evaluation is standard normal across seeds") {
    DyadicFn f = DyadicFn::indicator_unit_box(2);
    int N = 4000;
    double s = 0, s2 = 0;
    for (int i = 0; i < N; ++i) {
        WhiteNoise w(2, 3, 1.0, 100 + static_cast<uint64_t>(i));
        CHECK(w.variance_exact(f) == doctest::Approx(1.0).epsilon(1e-14));
        double v = w.evaluate(f);
        s += v;
        s2 += v * v;
    }
    double mean = s / N, var = s2 / N - mean * mean;
    CHECK(std::abs(mean) <= 3.0 / std::sqrt(static_cast<double>(N)));
    CHECK(var == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("variance identity holds to machine precision at native resolution") {
    // random piecewise-constant test functions on dyadic cells
    HashKey key(5);
    for (int trial = 0; trial < 5; ++trial) {
        DyadicFn f;
        f.dim = 2;
        f.level = 2;  // resolved by noise at level >= 2
        f.lo = {-2, -1, 0};
        f.hi = {3, 4, 1};
        f.values.resize(static_cast<size_t>(f.num_cells()));
        for (size_t i = 0; i < f.values.size(); ++i)
            f.values[i] = 2 * u01(key, static_cast<uint64_t>(trial * 1000 + i)) - 1;
        WhiteNoise w(2, 4, 1.3, 42);
        double exact = w.variance_exact(f);
        double formula = w.variance_cell_formula(f);
        CHECK(exact == doctest::Approx(formula).epsilon(1e-13));
        CHECK(formula == doctest::Approx(1.3 * f.l2_norm_sq()).epsilon(1e-13));
    }
}

TEST_CASE("sub-resolution functions see only their cell averages") {
    // f finer than the construction level: variance equals the e.variance
    // cell-average sum, strictly below ||f||^2
    DyadicFn f;
    f.dim = 1;
    f.level = 4;
    f.lo = {0, 0, 0};
    f.hi = {16, 1, 1};
    f.values.assign(16, 0.0);
    for (int i = 0; i < 16; ++i) f.values[static_cast<size_t>(i)] = (i % 2) ? 1.0 : -1.0;
    WhiteNoise w(1, 2, 1.0, 9);
    double exact = w.variance_exact(f);
    double formula = w.variance_cell_formula(f);
    CHECK(exact == doctest::Approx(formula).epsilon(1e-13));
    CHECK(exact < f.l2_norm_sq() - 0.5);  // oscillation cancels at level 2
}

TEST_CASE("refinement consistency: the detail tail telescopes") {
    HashKey key(8);
    DyadicFn f;
    f.dim = 2;
    f.level = 3;
    f.lo = {0, 0, 0};
    f.hi = {8, 8, 1};
    f.values.resize(64);
    for (size_t i = 0; i < 64; ++i) f.values[i] = u01(key, i);
    WhiteNoise wn(2, 1, 1.0, 77);
    WhiteNoise wn1(2, 2, 1.0, 77);
    double tail = wn.refinement_variance(f);
    CHECK(wn1.variance_exact(f) - wn.variance_exact(f) == doctest::Approx(tail).epsilon(1e-12));
}

TEST_CASE("disjoint dyadic supports are uncorrelated") {
    DyadicFn f = DyadicFn::cell_indicator(2, 1, {0, 0, 0});
    DyadicFn g = DyadicFn::cell_indicator(2, 1, {3, 2, 0});
    int N = 10000;
    double sf = 0, sg = 0, sfg = 0, sff = 0, sgg = 0;
    for (int i = 0; i < N; ++i) {
        WhiteNoise w(2, 3, 1.0, 5000 + static_cast<uint64_t>(i));
        double a = w.evaluate(f), b = w.evaluate(g);
        sf += a;
        sg += b;
        sfg += a * b;
        sff += a * a;
        sgg += b * b;
    }
    double n = N;
    double corr = (sfg / n - sf / n * sg / n) /
                  std::sqrt((sff / n - sf / n * sf / n) * (sgg / n - sg / n * sg / n));
    CHECK(std::abs(corr) <= 3.0 / std::sqrt(n));
}

TEST_CASE("white noise scaling exponent") {
    ScalingReport rep = scaling_check(1, 2, {1.0, 2.0, 4.0, 8.0}, 4000, 31);
    CHECK(rep.slope == doctest::Approx(-0.5).epsilon(0.2));
    CHECK(rep.sd[0] == doctest::Approx(1.0).epsilon(0.1));  // lambda = 1: unit variance
}

TEST_CASE("vector white noise respects the covariance") {
    SymMat Q(2);
    Q(0, 0) = 2.0;
    Q(1, 1) = 1.0;
    Q(0, 1) = Q(1, 0) = 0.5;
    DyadicFn box = DyadicFn::indicator_unit_box(2);
    DyadicFn zero = box;
    for (auto& v : zero.values) v = 0.0;
    int N = 8000;
    double s11 = 0, s22 = 0, s12 = 0;
    for (int i = 0; i < N; ++i) {
        WhiteNoise w(2, 2, Q, 900 + static_cast<uint64_t>(i));
        double w1 = w.evaluate_vec({box, zero});
        double w2 = w.evaluate_vec({zero, box});
        s11 += w1 * w1;
        s22 += w2 * w2;
        s12 += w1 * w2;
    }
    CHECK(s11 / N == doctest::Approx(2.0).epsilon(0.1));
    CHECK(s22 / N == doctest::Approx(1.0).epsilon(0.1));
    CHECK(s12 / N == doctest::Approx(0.5).epsilon(0.25));
}

TEST_CASE("helmholtz projection: recovery, kernel, idempotence") {
    Grid torus = Grid::torus(2, 8, 4);
    SymMat ahom(2);
    ahom(0, 0) = 2.0;
    ahom(1, 1) = 1.5;
    ahom(0, 1) = ahom(1, 0) = 0.3;
    GradientGff gff(torus, ahom, SymMat::identity(2));

    // forward map: F = ahom grad u0 recovers grad u0
    int64_t n = torus.num_cells();
    ScalarField u0(torus, Centering::Cell);
    for (int64_t i = 0; i < n; ++i) {
        auto c = torus.cell_coords(i);
        u0.data[static_cast<size_t>(i)] =
            std::sin(2 * M_PI * c[0] / static_cast<double>(torus.cells[0])) +
            0.5 * std::cos(4 * M_PI * c[1] / static_cast<double>(torus.cells[1]));
    }
    VectorField grad_u0(torus, true);
    for (int j = 0; j < 2; ++j)
        for (int64_t i = 0; i < n; ++i) {
            auto c = torus.cell_coords(i);
            auto cp = c;
            cp[j] = torus.wrap(cp[j] + 1, j);
            grad_u0.comp[j][static_cast<size_t>(i)] =
                (u0.data[static_cast<size_t>(torus.cell_index(cp))] -
                 u0.data[static_cast<size_t>(i)]) /
                torus.h;
        }
    VectorField F(torus, true);
    for (int64_t i = 0; i < n; ++i) {
        for (int j = 0; j < 2; ++j) {
            double s = 0;
            for (int c = 0; c < 2; ++c) s += ahom(j, c) * grad_u0.comp[c][static_cast<size_t>(i)];
            F.comp[j][static_cast<size_t>(i)] = s;
        }
    }
    VectorField P = gff.project(F);
    for (int j = 0; j < 2; ++j)
        for (int64_t i = 0; i < n; ++i)
            CHECK(P.comp[j][static_cast<size_t>(i)] ==
                  doctest::Approx(grad_u0.comp[j][static_cast<size_t>(i)])
                      .epsilon(1e-8)
                      .scale(1.0));

    // divergence-free fields project to zero
    ScalarField psi(torus, Centering::Cell);
    HashKey key(3);
    for (int64_t i = 0; i < n; ++i) psi.data[static_cast<size_t>(i)] = u01(key, static_cast<uint64_t>(i));
    VectorField sol(torus, true);
    for (int64_t i = 0; i < n; ++i) {
        auto c = torus.cell_coords(i);
        auto cm2 = c, cm1 = c;
        cm2[1] = torus.wrap(cm2[1] - 1, 1);
        cm1[0] = torus.wrap(cm1[0] - 1, 0);
        // s1 = -D-_2 psi, s2 = +D-_1 psi: exactly divergence-free
        sol.comp[0][static_cast<size_t>(i)] =
            -(psi.data[static_cast<size_t>(i)] -
              psi.data[static_cast<size_t>(torus.cell_index(cm2))]) /
            torus.h;
        sol.comp[1][static_cast<size_t>(i)] =
            (psi.data[static_cast<size_t>(i)] -
             psi.data[static_cast<size_t>(torus.cell_index(cm1))]) /
            torus.h;
    }
    VectorField P0 = gff.project(sol);
    double scale = 0;
    for (int j = 0; j < 2; ++j)
        for (double v : sol.comp[j]) scale = std::max(scale, std::abs(v));
    for (int j = 0; j < 2; ++j)
        for (double v : P0.comp[j]) CHECK(std::abs(v) <= 1e-8 * scale);

    // idempotence: projecting ahom * (projection) returns the projection
    VectorField aP(torus, true);
    for (int64_t i = 0; i < n; ++i)
        for (int j = 0; j < 2; ++j) {
            double s = 0;
            for (int c = 0; c < 2; ++c) s += ahom(j, c) * P.comp[c][static_cast<size_t>(i)];
            aP.comp[j][static_cast<size_t>(i)] = s;
        }
    VectorField PP = gff.project(aP);
    for (int j = 0; j < 2; ++j)
        for (int64_t i = 0; i < n; ++i)
            CHECK(PP.comp[j][static_cast<size_t>(i)] ==
                  doctest::Approx(P.comp[j][static_cast<size_t>(i)]).epsilon(1e-8).scale(1.0));
}

TEST_CASE("gff variance formula matches monte carlo") {
    Grid torus = Grid::torus(2, 4, 4);
    SymMat ahom = SymMat::identity(2, 1.0);
    SymMat Q = SymMat::identity(2, 1.0);
    GradientGff gff(torus, ahom, Q);
    // fixed smooth test field
    int64_t n = torus.num_cells();
    VectorField F(torus, true);
    for (int64_t i = 0; i < n; ++i) {
        auto c = torus.cell_coords(i);
        double x = c[0] * torus.h, y = c[1] * torus.h;
        F.comp[0][static_cast<size_t>(i)] = std::sin(2 * M_PI * x / 4.0);
        F.comp[1][static_cast<size_t>(i)] = std::cos(2 * M_PI * (x + y) / 4.0);
    }
    double formula = gff.variance_formula(F);
    int N = 10000;
    double s = 0, s2 = 0;
    for (int i = 0; i < N; ++i) {
        double v = gff.evaluate(gff.sample_noise(10000 + static_cast<uint64_t>(i)), F);
        s += v;
        s2 += v * v;
    }
    double mc = s2 / N - (s / N) * (s / N);
    // 3 sigma of a variance estimate: var(v^2) ~ 2 formula^2 / N
    double band = 3.0 * formula * std::sqrt(2.0 / N);
    CHECK(std::abs(mc - formula) <= band);

    // Q = 0 gives the zero field
    GradientGff zero(torus, ahom, SymMat(2));
    VectorField W0 = zero.sample_noise(5);
    for (int j = 0; j < 2; ++j)
        for (double v : W0.comp[j]) CHECK(v == 0.0);

    // gradients are reproduced: Var grad Psi(grad h) = int |grad h|^2 for
    // ahom = Q = I (projection is the identity on gradients)
    VectorField gh(torus, true);
    ScalarField h(torus, Centering::Cell);
    for (int64_t i = 0; i < n; ++i) {
        auto c = torus.cell_coords(i);
        h.data[static_cast<size_t>(i)] = std::sin(2 * M_PI * c[0] / static_cast<double>(torus.cells[0]));
    }
    for (int j = 0; j < 2; ++j)
        for (int64_t i = 0; i < n; ++i) {
            auto c = torus.cell_coords(i);
            auto cp = c;
            cp[j] = torus.wrap(cp[j] + 1, j);
            gh.comp[j][static_cast<size_t>(i)] =
                (h.data[static_cast<size_t>(torus.cell_index(cp))] -
                 h.data[static_cast<size_t>(i)]) /
                torus.h;
        }
    double var_gh = gff.variance_formula(gh);
    double l2 = 0;
    for (int j = 0; j < 2; ++j)
        for (double v : gh.comp[j]) l2 += v * v;
    l2 *= std::pow(torus.h, 2);
    CHECK(var_gh == doctest::Approx(l2).epsilon(1e-10));
}

TEST_CASE("potential is gauge invariant and linear") {
    Grid torus = Grid::torus(2, 4, 4);
    GradientGff gff(torus, SymMat::identity(2), SymMat::identity(2));
    int64_t n = torus.num_cells();
    ScalarField f(torus, Centering::Cell);
    HashKey key(17);
    for (int64_t i = 0; i < n; ++i) f.data[static_cast<size_t>(i)] = u01(key, static_cast<uint64_t>(i)) - 0.5;
    f.subtract_mean();

    VectorField F = gff.divergence_potential(f);
    // div F = f exactly
    ScalarField div(torus, Centering::Cell);
    for (int64_t i = 0; i < n; ++i) {
        double acc = 0;
        for (int j = 0; j < 2; ++j) {
            auto c = torus.cell_coords(i);
            auto cm = c;
            cm[j] = torus.wrap(cm[j] - 1, j);
            acc += (F.comp[j][static_cast<size_t>(i)] -
                    F.comp[j][static_cast<size_t>(torus.cell_index(cm))]) /
                   torus.h;
        }
        CHECK(acc == doctest::Approx(f.data[static_cast<size_t>(i)]).epsilon(1e-10).scale(1.0));
    }

    VectorField noise = gff.sample_noise(321);
    double via_staircase = -gff.evaluate(noise, F);
    // second admissible F: add an exactly divergence-free field
    ScalarField psi(torus, Centering::Cell);
    for (int64_t i = 0; i < n; ++i) psi.data[static_cast<size_t>(i)] = u01(key, 10000 + static_cast<uint64_t>(i));
    VectorField F2 = F;
    for (int64_t i = 0; i < n; ++i) {
        auto c = torus.cell_coords(i);
        auto cm2 = c, cm1 = c;
        cm2[1] = torus.wrap(cm2[1] - 1, 1);
        cm1[0] = torus.wrap(cm1[0] - 1, 0);
        F2.comp[0][static_cast<size_t>(i)] +=
            -(psi.data[static_cast<size_t>(i)] -
              psi.data[static_cast<size_t>(torus.cell_index(cm2))]) /
            torus.h;
        F2.comp[1][static_cast<size_t>(i)] +=
            (psi.data[static_cast<size_t>(i)] -
             psi.data[static_cast<size_t>(torus.cell_index(cm1))]) /
            torus.h;
    }
    double via_alternate = -gff.evaluate(noise, F2);
    CHECK(via_staircase == doctest::Approx(via_alternate).epsilon(1e-8).scale(1.0));
    CHECK(gff.potential_from_gradient(noise, f) ==
          doctest::Approx(via_staircase).epsilon(1e-12).scale(1.0));

    // f = 0 evaluates to zero
    ScalarField zero(torus, Centering::Cell);
    CHECK(gff.potential_from_gradient(noise, zero) == 0.0);
}

TEST_CASE("d=2 potential variance grows logarithmically under dilation") {
    // deterministic variance computation; bump test functions at scales
    // r, 2r, 4r, ... on a torus large enough to hold them
    Grid torus = Grid::torus(2, 64, 1);
    GradientGff gff(torus, SymMat::identity(2), SymMat::identity(2));
    int64_t n = torus.num_cells();
    auto bump = [&](double r) {
        ScalarField f(torus, Centering::Cell);
        double cx = 32.0, cy = 32.0;
        for (int64_t i = 0; i < n; ++i) {
            auto c = torus.cell_coords(i);
            Vec x(2, {(c[0] + 0.5) * torus.h - cx, (c[1] + 0.5) * torus.h - cy});
            Vec scaled(2, {x[0] / r, x[1] / r});
            f.data[static_cast<size_t>(i)] = standard_mollifier(2, scaled) / (r * r);
        }
        return f;
    };
    // Var[Psi(f_{2^k r0}) - Psi(f_{r0})] should grow linearly in k
    double r0 = 2.0;
    ScalarField f0 = bump(r0);
    std::vector<double> ks, vars;
    for (int k = 1; k <= 4; ++k) {
        ScalarField fk = bump(r0 * std::pow(2.0, k));
        ScalarField diff(torus, Centering::Cell);
        for (int64_t i = 0; i < n; ++i)
            diff.data[static_cast<size_t>(i)] =
                fk.data[static_cast<size_t>(i)] - f0.data[static_cast<size_t>(i)];
        diff.subtract_mean();  // strip quadrature-level mass mismatch
        VectorField F = gff.divergence_potential(diff);
        ks.push_back(static_cast<double>(k));
        vars.push_back(gff.variance_formula(F));
    }
    // linear fit in k: positive slope, increments within 30% of the mean
    double slope = oracles::lsq_slope(ks, vars);
    CHECK(slope > 0.0);
    for (size_t i = 1; i < vars.size(); ++i) {
        double inc = vars[i] - vars[i - 1];
        CHECK(inc == doctest::Approx(slope).epsilon(0.30));
    }
}
