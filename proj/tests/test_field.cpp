#include <doctest.h>

#include <cmath>

#include "homolab/field.hpp"
#include "homolab/rng.hpp"

using namespace homolab;

TEST_CASE("constant law evaluates to its matrix everywhere") {
    FieldSpec spec;
    spec.dim = 2;
    spec.lambda = 4.0;
    spec.kind = LawKind::Constant;
    spec.constant.value = SymMat::identity(2, 2.0);
    CoefficientSample f(spec, 77);
    for (double x : {-3.7, 0.0, 12.4}) {
        SymMat a = f.eval(Vec(2, {x, -x}));
        CHECK(a(0, 0) == 2.0);
        CHECK(a(1, 1) == 2.0);
        CHECK(a(0, 1) == 0.0);
    }
}

TEST_CASE("degenerate checkerboard mixture is constant") {
    FieldSpec spec;
    spec.dim = 2;
    spec.lambda = 4.0;
    spec.kind = LawKind::Checkerboard;
    spec.checkerboard.values = {SymMat::identity(2, 3.0), SymMat::identity(2, 3.0)};
    spec.checkerboard.probs = {0.4, 0.6};
    CoefficientSample f(spec, 3);
    for (double x : {-5.2, 0.3, 9.9})
        CHECK(f.eval(Vec(2, {x, 2 * x}))(0, 0) == 3.0);
}

TEST_CASE("checkerboard is piecewise constant on unit cells") {
    FieldSpec spec;
    spec.dim = 2;
    spec.lambda = 4.0;
    spec.kind = LawKind::Checkerboard;
    spec.checkerboard.values = {SymMat::identity(2, 1.0), SymMat::identity(2, 4.0)};
    spec.checkerboard.probs = {0.5, 0.5};
    CoefficientSample f(spec, 19);
    // same unit cell -> identical matrices
    CHECK(f.eval(Vec(2, {0.1, 0.2}))(0, 0) == f.eval(Vec(2, {0.3, -0.1}))(0, 0));
    CHECK(f.eval(Vec(2, {5.1, 5.2}))(0, 0) == f.eval(Vec(2, {4.8, 5.4}))(0, 0));
}

TEST_CASE("checkerboard empirical mean obeys the law-of-large-numbers band") {
    // mean of a11 over 3^6 unit cells: expect 2.5 within 3 sigma, sigma = 1.5/3^3
    FieldSpec spec;
    spec.dim = 2;
    spec.lambda = 4.0;
    spec.kind = LawKind::Checkerboard;
    spec.checkerboard.values = {SymMat::identity(2, 1.0), SymMat::identity(2, 4.0)};
    spec.checkerboard.probs = {0.5, 0.5};
    CoefficientSample f(spec, 2024);
    double mean = 0;
    int side = 27;  // 27^2 = 3^6 unit cells
    for (int i = 0; i < side; ++i)
        for (int j = 0; j < side; ++j)
            mean += f.eval11(Vec(2, {static_cast<double>(i), static_cast<double>(j)}));
    mean /= side * side;
    double sigma = 1.5 / 27.0;
    CHECK(std::abs(mean - 2.5) <= 3 * sigma);
}

TEST_CASE("eval is deterministic and within ellipticity bounds") {
    FieldSpec spec;
    spec.dim = 2;
    spec.lambda = 4.0;
    spec.kind = LawKind::MollifiedWhiteNoise;
    spec.mollified.kernel_radius = 0.25;
    spec.mollified.noise_res = 4;
    CoefficientSample f1(spec, 5), f2(spec, 5);
    HashKey key(1);
    for (int t = 0; t < 50; ++t) {
        Vec x(2, {20.0 * u01(key, static_cast<uint64_t>(2 * t)) - 10.0,
                  20.0 * u01(key, static_cast<uint64_t>(2 * t + 1)) - 10.0});
        SymMat a = f1.eval(x);
        CHECK(a(0, 0) == f2.eval(x)(0, 0));  // bit-identical across instances
        CHECK(eigen_bounds_hold(a, 1.0, spec.lambda, 1e-12));
    }
}

TEST_CASE("poisson inclusions follow the geometric rule") {
    FieldSpec spec;
    spec.dim = 2;
    spec.lambda = 4.0;
    spec.kind = LawKind::PoissonInclusions;
    spec.poisson.intensity = 1.0;
    spec.poisson.radius_min = 0.25;
    spec.poisson.radius_max = 0.25;
    spec.poisson.inside = SymMat::identity(2, 4.0);
    spec.poisson.outside = SymMat::identity(2, 1.0);
    CoefficientSample f(spec, 33);

    // independent geometric oracle: rebuild the point cloud over a window
    // straight from the hash primitives and classify by distance
    HashKey key(33);
    auto classify = [&](const Vec& x) {
        for (int64_t zx = static_cast<int64_t>(std::floor(x[0] + 0.5)) - 2;
             zx <= static_cast<int64_t>(std::floor(x[0] + 0.5)) + 2; ++zx) {
            for (int64_t zy = static_cast<int64_t>(std::floor(x[1] + 0.5)) - 2;
                 zy <= static_cast<int64_t>(std::floor(x[1] + 0.5)) + 2; ++zy) {
                HashKey kc = key.with(0x706f697373ULL).with_signed(zx).with_signed(zy);
                int count = poisson(kc, 0, 1.0);
                HashKey kp = key.with(0x70707473ULL).with_signed(zx).with_signed(zy);
                for (int p = 0; p < count; ++p) {
                    double px = zx - 0.5 + u01(kp, static_cast<uint64_t>(p * 3 + 0));
                    double py = zy - 0.5 + u01(kp, static_cast<uint64_t>(p * 3 + 1));
                    double r = 0.25;
                    double dx = x[0] - px, dy = x[1] - py;
                    if (dx * dx + dy * dy <= r * r) return 4.0;
                }
            }
        }
        return 1.0;
    };
    HashKey probe(4);
    int inside_hits = 0;
    for (int t = 0; t < 200; ++t) {
        Vec x(2, {10 * u01(probe, static_cast<uint64_t>(2 * t)) - 5,
                  10 * u01(probe, static_cast<uint64_t>(2 * t + 1)) - 5});
        double expect = classify(x);
        CHECK(f.eval11(x) == expect);
        if (expect == 4.0) ++inside_hits;
    }
    CHECK(inside_hits > 0);  // the window is not trivially empty
}

TEST_CASE("restrict_to_grid samples cell centers") {
    FieldSpec spec;
    spec.dim = 2;
    spec.lambda = 2.0;
    spec.kind = LawKind::Constant;
    spec.constant.value = SymMat::identity(2, 2.0);
    CoefficientSample f(spec, 8);
    Grid g = Grid::cube_box(TriadicCube::centered(2, 1), 3);
    auto arr = restrict_to_grid(f, g);
    CHECK(static_cast<int64_t>(arr.size()) == g.num_cells());
    for (const auto& a : arr) CHECK(a(0, 0) == 2.0);

    // mollified white noise restriction keeps ellipticity entrywise
    FieldSpec mw;
    mw.dim = 2;
    mw.lambda = 4.0;
    mw.kind = LawKind::MollifiedWhiteNoise;
    mw.mollified.noise_res = 8;
    CoefficientSample fm(mw, 17);
    auto arr2 = restrict_to_grid(fm, Grid::cube_box(TriadicCube::centered(2, 1), 8));
    for (const auto& a : arr2) CHECK(eigen_bounds_hold(a, 1.0, 4.0, 1e-12));
}

TEST_CASE("determinism: identical spec and seed give identical arrays") {
    FieldSpec spec;
    spec.dim = 2;
    spec.lambda = 4.0;
    spec.kind = LawKind::PoissonInclusions;
    spec.poisson.intensity = 0.8;
    spec.poisson.radius_min = 0.1;
    spec.poisson.radius_max = 0.4;
    spec.poisson.inside = SymMat::identity(2, 1.0);
    spec.poisson.outside = SymMat::identity(2, 3.0);
    Grid g = Grid::cube_box(TriadicCube::centered(2, 2), 2);
    auto a1 = restrict_to_grid(CoefficientSample(spec, 12345), g);
    auto a2 = restrict_to_grid(CoefficientSample(spec, 12345), g);
    for (size_t i = 0; i < a1.size(); ++i) CHECK(a1[i](0, 0) == a2[i](0, 0));
}

TEST_CASE("validation errors name the offending field") {
    FieldSpec spec;
    spec.dim = 2;
    spec.lambda = 2.0;
    spec.kind = LawKind::Checkerboard;
    spec.checkerboard.values = {SymMat::identity(2, 1.0), SymMat::identity(2, 4.0)};
    spec.checkerboard.probs = {0.5, 0.5};
    CHECK_THROWS_WITH_AS(spec.validate(),
                         doctest::Contains("checkerboard.values"), std::invalid_argument);

    FieldSpec bad_probs;
    bad_probs.dim = 2;
    bad_probs.lambda = 4.0;
    bad_probs.kind = LawKind::Checkerboard;
    bad_probs.checkerboard.values = {SymMat::identity(2, 1.0), SymMat::identity(2, 4.0)};
    bad_probs.checkerboard.probs = {0.6, 0.6};
    CHECK_THROWS_WITH_AS(bad_probs.validate(), doctest::Contains("probs"),
                         std::invalid_argument);

    FieldSpec bad_radius;
    bad_radius.dim = 2;
    bad_radius.lambda = 4.0;
    bad_radius.kind = LawKind::PoissonInclusions;
    bad_radius.poisson.radius_max = 0.75;
    bad_radius.poisson.inside = SymMat::identity(2, 2.0);
    bad_radius.poisson.outside = SymMat::identity(2, 1.0);
    CHECK_THROWS_WITH_AS(bad_radius.validate(), doctest::Contains("radius"),
                         std::invalid_argument);
}

TEST_CASE("dependence diagnostic: decorrelation beyond unit range") {
    FieldSpec spec;
    spec.dim = 2;
    spec.lambda = 4.0;
    spec.kind = LawKind::Checkerboard;
    spec.checkerboard.values = {SymMat::identity(2, 1.0), SymMat::identity(2, 4.0)};
    spec.checkerboard.probs = {0.5, 0.5};
    int n = 400;
    auto rows = dependence_diagnostic(spec, 900, n, {0.0, 2.0, 3.0});
    CHECK(rows[0].correlation == doctest::Approx(1.0).epsilon(1e-12));
    for (size_t i = 1; i < rows.size(); ++i) {
        CHECK(!rows[i].degenerate);
        CHECK(std::abs(rows[i].correlation) <= 3.0 / std::sqrt(static_cast<double>(n)));
    }

    // constant law: degenerate flag
    FieldSpec c;
    c.dim = 2;
    c.lambda = 2.0;
    c.kind = LawKind::Constant;
    c.constant.value = SymMat::identity(2, 2.0);
    auto crows = dependence_diagnostic(c, 1, 16, {1.0});
    CHECK(crows[0].degenerate);

    // mollified white noise with kernel radius 1/4 at distance 2
    FieldSpec mw;
    mw.dim = 2;
    mw.lambda = 4.0;
    mw.kind = LawKind::MollifiedWhiteNoise;
    mw.mollified.kernel_radius = 0.25;
    mw.mollified.noise_res = 4;
    auto mrows = dependence_diagnostic(mw, 31, n, {2.0});
    CHECK(std::abs(mrows[0].correlation) <= 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("translated sampling window has a statistically equal mean") {
    FieldSpec spec;
    spec.dim = 2;
    spec.lambda = 4.0;
    spec.kind = LawKind::Checkerboard;
    spec.checkerboard.values = {SymMat::identity(2, 1.0), SymMat::identity(2, 4.0)};
    spec.checkerboard.probs = {0.5, 0.5};
    CoefficientSample f(spec, 556);
    auto window_mean = [&](double ox, double oy) {
        double m = 0;
        int side = 27;
        for (int i = 0; i < side; ++i)
            for (int j = 0; j < side; ++j) m += f.eval11(Vec(2, {ox + i, oy + j}));
        return m / (side * side);
    };
    double m0 = window_mean(0, 0);
    double m1 = window_mean(1000, -500);
    double sigma = 1.5 / 27.0;
    CHECK(std::abs(m0 - 2.5) <= 3 * sigma);
    CHECK(std::abs(m1 - 2.5) <= 3 * sigma);
}
