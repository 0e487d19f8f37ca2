#include <doctest.h>

#include <cmath>

#include "homolab/corrector.hpp"
#include "homolab/energy.hpp"
#include "oracles.hpp"

using namespace homolab;

namespace {

FieldSpec checkerboard_2d() {
    FieldSpec spec;
    spec.dim = 2;
    spec.lambda = 4.0;
    spec.kind = LawKind::Checkerboard;
    spec.checkerboard.values = {SymMat::identity(2, 1.0), SymMat::identity(2, 4.0)};
    spec.checkerboard.probs = {0.5, 0.5};
    return spec;
}

FieldSpec constant_2d(double c) {
    FieldSpec spec;
    spec.dim = 2;
    spec.lambda = std::max(c, 2.0);
    spec.kind = LawKind::Constant;
    spec.constant.value = SymMat::identity(2, c);
    return spec;
}

}  // namespace

TEST_CASE("nu on constant fields and the zero slope") {
    CoefficientSample f(constant_2d(2.0), 1);
    TriadicCube cube = TriadicCube::centered(2, 1);
    EnergyOptions opts;
    opts.cells_per_unit = 3;
    CHECK(nu(f, cube, Vec::unit(2, 0), opts) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(nu(f, cube, Vec(2), opts)) < 1e-14);
}

TEST_CASE("nu bounds hold samplewise") {
    FieldSpec spec = checkerboard_2d();
    EnergyOptions opts;
    opts.cells_per_unit = 2;
    TriadicCube cube = TriadicCube::centered(2, 2);
    for (uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        CoefficientSample f(spec, seed);
        Vec p(2, {0.6, -0.8});
        double v = nu(f, cube, p, opts);
        CHECK(v >= 0.5 * p.dot(p) - 1e-8);
        CHECK(v <= 0.5 * spec.lambda * p.dot(p) + 1e-8);
    }
}

TEST_CASE("1d nu equals half the sample harmonic mean") {
    FieldSpec spec;
    spec.dim = 1;
    spec.lambda = 4.0;
    spec.kind = LawKind::Layered1D;
    spec.layered.values = {1.0, 4.0};
    spec.layered.probs = {0.5, 0.5};
    CoefficientSample f(spec, 321);
    TriadicCube cube = TriadicCube::centered(1, 3);
    EnergyOptions opts;
    opts.cells_per_unit = 4;
    Grid g = Grid::cube_box(cube, opts.cells_per_unit);
    auto coeff = restrict_to_grid(f, g);
    std::vector<double> cells(coeff.size());
    for (size_t i = 0; i < cells.size(); ++i) cells[i] = coeff[i](0, 0);
    double p = 1.0;
    CHECK(nu(f, cube, Vec(1, {p}), opts) ==
          doctest::Approx(oracles::exact_1d_nu(cells, p)).epsilon(1e-8));
}

TEST_CASE("nu_star values and the duality inequality") {
    CoefficientSample f(constant_2d(2.0), 5);
    TriadicCube cube = TriadicCube::centered(2, 1);
    EnergyOptions opts;
    opts.cells_per_unit = 3;
    CHECK(nu_star(f, cube, Vec::unit(2, 0), opts) == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(std::abs(nu_star(f, cube, Vec(2), opts)) < 1e-14);

    FieldSpec spec = checkerboard_2d();
    HashKey key(777);
    CoefficientSample cb(spec, 40);
    for (int t = 0; t < 10; ++t) {
        Vec p(2), q(2);
        for (int a = 0; a < 2; ++a) {
            p[a] = 2 * u01(key, static_cast<uint64_t>(4 * t + a)) - 1;
            q[a] = 2 * u01(key, static_cast<uint64_t>(4 * t + 2 + a)) - 1;
        }
        double s = nu(cb, cube, p, opts) + nu_star(cb, cube, q, opts);
        CHECK(s >= p.dot(q) - 1e-8);
    }
}

TEST_CASE("J vanishes at the dual pair for constant coefficients") {
    CoefficientSample f(constant_2d(2.0), 2);
    TriadicCube cube = TriadicCube::centered(2, 1);
    EnergyOptions opts;
    opts.cells_per_unit = 3;
    Vec p(2, {0.3, -1.1});
    Vec q = p * 2.0;  // q = c p
    EnergyReport rep = j_quantity(f, cube, p, q, opts);
    CHECK(std::abs(rep.j) < 1e-9);

    EnergyReport rep2 = j_quantity(f, cube, Vec::unit(2, 0), Vec(2), opts);
    CHECK(rep2.j == doctest::Approx(1.0).epsilon(1e-9));
    // mean gradient of the Dirichlet minimizer is exactly p
    CHECK(rep2.grad_avg_dirichlet[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(rep2.grad_avg_dirichlet[1]) < 1e-12);
}

TEST_CASE("J is nonnegative at the recovered dual slope") {
    FieldSpec spec = checkerboard_2d();
    CoefficientSample f(spec, 91);
    TriadicCube cube = TriadicCube::centered(2, 1);
    EnergyOptions opts;
    opts.cells_per_unit = 3;
    QuadraticFormPair pair = recover_quadratic_forms(f, cube, opts);
    Vec p = Vec::unit(2, 0);
    Vec q = pair.a_U.apply(p);
    EnergyReport rep = j_quantity(f, cube, p, q, opts);
    CHECK(rep.j >= -1e-8);
}

TEST_CASE("quadratic form recovery: constants and rebuild consistency") {
    CoefficientSample f(constant_2d(3.0), 4);
    TriadicCube cube = TriadicCube::centered(2, 1);
    EnergyOptions opts;
    opts.cells_per_unit = 2;
    QuadraticFormPair pair = recover_quadratic_forms(f, cube, opts);
    CHECK(pair.a_U(0, 0) == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(pair.a_U(1, 1) == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(std::abs(pair.a_U(0, 1)) < 1e-9);
    CHECK(pair.b_U(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));

    // J rebuilt from the pair matches the direct evaluation at random (p, q)
    FieldSpec spec = checkerboard_2d();
    CoefficientSample cb(spec, 17);
    QuadraticFormPair cp = recover_quadratic_forms(cb, cube, opts);
    HashKey key(31);
    for (int t = 0; t < 5; ++t) {
        Vec p(2), q(2);
        for (int a = 0; a < 2; ++a) {
            p[a] = 2 * u01(key, static_cast<uint64_t>(4 * t + a)) - 1;
            q[a] = 2 * u01(key, static_cast<uint64_t>(4 * t + 2 + a)) - 1;
        }
        double direct = j_quantity(cb, cube, p, q, opts).j;
        double rebuilt = 0.5 * cp.a_U.quad(p) + 0.5 * cp.b_U.quad(q) - p.dot(q);
        CHECK(rebuilt == doctest::Approx(direct).epsilon(1e-8).scale(1.0));
    }
    // eigenvalue sanity at desk scale
    CHECK(eigen_bounds_hold(cp.a_U, 1.0 / (2 * spec.lambda), 2 * spec.lambda, 1e-9));
    CHECK(eigen_bounds_hold(cp.b_U, 1.0 / (2 * spec.lambda), 2 * spec.lambda, 1e-9));
}

TEST_CASE("1d recovered a_U equals the exact harmonic mean") {
    FieldSpec spec;
    spec.dim = 1;
    spec.lambda = 4.0;
    spec.kind = LawKind::Layered1D;
    spec.layered.values = {1.0, 4.0};
    spec.layered.probs = {0.5, 0.5};
    CoefficientSample f(spec, 654);
    TriadicCube cube = TriadicCube::centered(1, 3);
    EnergyOptions opts;
    opts.cells_per_unit = 4;
    QuadraticFormPair pair = recover_quadratic_forms(f, cube, opts);
    Grid g = Grid::cube_box(cube, opts.cells_per_unit);
    auto coeff = restrict_to_grid(f, g);
    double inv = 0;
    for (const auto& a : coeff) inv += 1.0 / a(0, 0);
    inv /= static_cast<double>(coeff.size());
    CHECK(pair.a_U(0, 0) == doctest::Approx(1.0 / inv).epsilon(1e-8));
}

TEST_CASE("subadditivity slack is exact for constants and nonnegative on samples") {
    CoefficientSample f(constant_2d(2.0), 6);
    TriadicCube cube = TriadicCube::centered(2, 1);
    EnergyOptions opts;
    opts.cells_per_unit = 3;
    SubadditivityReport rep =
        subadditivity_check(f, cube, Vec::unit(2, 0), Vec::unit(2, 1), opts);
    CHECK(std::abs(rep.slack_nu) < 1e-9);

    FieldSpec spec = checkerboard_2d();
    for (uint64_t seed : {11ULL, 12ULL, 13ULL}) {
        CoefficientSample cb(spec, seed);
        SubadditivityReport r =
            subadditivity_check(cb, cube, Vec(2, {1.0, 0.5}), Vec(2, {0.5, 1.0}), opts);
        CHECK(r.slack_nu >= -1e-8);
        CHECK(r.slack_j >= -1e-8);
    }
}

TEST_CASE("derivative identities against central differences") {
    EnergyOptions opts;
    opts.cells_per_unit = 3;
    opts.solver.tol = 1e-12;
    TriadicCube cube = TriadicCube::centered(2, 1);

    CoefficientSample cf(constant_2d(2.0), 3);
    DerivativeResiduals res =
        derivative_identities_check(cf, cube, Vec(2, {0.4, 0.2}), Vec(2, {-0.3, 0.8}), opts);
    CHECK(res.dJ_dp < 1e-6);
    CHECK(res.dJ_dq < 1e-6);
    CHECK(res.flux_identity < 1e-6);
    CHECK(res.quad_response_low <= 1e-8);
    CHECK(res.quad_response_high <= 1e-8);

    FieldSpec spec = checkerboard_2d();
    CoefficientSample cb(spec, 77);
    DerivativeResiduals r2 =
        derivative_identities_check(cb, cube, Vec(2, {1.0, 0.0}), Vec(2, {0.0, 1.0}), opts);
    CHECK(r2.dJ_dp < 1e-5);
    CHECK(r2.dJ_dq < 1e-5);
    CHECK(r2.flux_identity < 1e-5);
    CHECK(r2.quad_response_low <= 1e-8);
    CHECK(r2.quad_response_high <= 1e-8);
}

TEST_CASE("j1 on a heat mask: closed form for constant fields") {
    FieldSpec spec = constant_2d(2.0);
    CoefficientSample f(spec, 10);
    CorrectorOptions copts;
    copts.cells_per_unit = 2;
    CorrectorSet cs = compute_correctors(f, 16, copts);
    Vec center(2, {8.0, 8.0});
    HeatKernelMask mask = make_heat_mask(cs.torus, center, 2.0);
    Vec p(2, {0.7, -0.2}), q(2, {0.1, 0.9});
    double j1 = j1_mask(cs, mask, p, q);
    double expect = 0.5 * 2.0 * p.dot(p) + 0.5 * 0.5 * q.dot(q) - p.dot(q);
    CHECK(j1 == doctest::Approx(expect).epsilon(1e-9));

    // q = ahom p gives zero
    Vec q2 = p * 2.0;
    CHECK(std::abs(j1_mask(cs, mask, p, q2)) < 1e-9);
}

TEST_CASE("j1 is quadratic: polarization residual vanishes") {
    FieldSpec spec = checkerboard_2d();
    CoefficientSample f(spec, 5);
    CorrectorOptions copts;
    copts.cells_per_unit = 2;
    CorrectorSet cs = compute_correctors(f, 16, copts);
    HeatKernelMask mask = make_heat_mask(cs.torus, Vec(2, {8.0, 8.0}), 2.0);
    // J1 is jointly quadratic in (p, q): parallelogram law on the pair
    Vec p1(2, {1.0, 0.0}), q1(2, {0.3, 0.4});
    Vec p2(2, {0.0, 1.0}), q2(2, {-0.2, 0.6});
    double a = j1_mask(cs, mask, p1 + p2, q1 + q2);
    double b = j1_mask(cs, mask, p1 - p2, q1 - q2);
    double c = j1_mask(cs, mask, p1, q1);
    double d = j1_mask(cs, mask, p2, q2);
    CHECK(a + b == doctest::Approx(2 * c + 2 * d).epsilon(1e-8).scale(1.0));
    CHECK(std::abs(j1_mask(cs, mask, Vec(2), Vec(2))) < 1e-12);
}

TEST_CASE("monotone means across one triadic level") {
    FieldSpec spec = checkerboard_2d();
    EnergyOptions opts;
    opts.cells_per_unit = 2;
    Vec p = Vec::unit(2, 0);
    int M = 64;
    auto stats = [&](int level) {
        TriadicCube cube = TriadicCube::centered(2, level);
        double s = 0, s2 = 0;
        for (int i = 0; i < M; ++i) {
            CoefficientSample f(spec, 3000 + static_cast<uint64_t>(i));
            double v = nu(f, cube, p, opts);
            s += v;
            s2 += v * v;
        }
        double mean = s / M;
        double var = (s2 / M - mean * mean) * M / (M - 1);
        return std::pair<double, double>(mean, std::sqrt(var / M));
    };
    auto [m1, se1] = stats(1);
    auto [m2, se2] = stats(2);
    CHECK(m2 <= m1 + 2 * std::hypot(se1, se2));
}
