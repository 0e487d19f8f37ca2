#include <doctest.h>

#include <cmath>

#include "homolab/grid.hpp"
#include "homolab/rng.hpp"
#include "oracles.hpp"

using namespace homolab;

TEST_CASE("subdivision counts and exact tiling") {
    TriadicCube c = TriadicCube::centered(2, 1);
    auto kids = subdivide(c, 0);
    CHECK(kids.size() == 9);

    TriadicCube c2 = TriadicCube::centered(2, 2);
    auto kids2 = subdivide(c2, 1);
    CHECK(kids2.size() == 9);

    // union-of-children volume equals parent volume (index-count oracle)
    double vol = 0;
    for (const auto& k : subdivide(TriadicCube::centered(3, 2), 0)) vol += k.volume();
    CHECK(vol == doctest::Approx(TriadicCube::centered(3, 2).volume()).epsilon(1e-14));

    CHECK_THROWS(subdivide(c, 2));
}

TEST_CASE("every fine cell belongs to exactly one child cube") {
    TriadicCube parent = TriadicCube::centered(2, 2);
    Grid g = Grid::cube_box(parent, 3);
    auto kids = subdivide(parent, 1);
    int64_t n = g.num_cells();
    for (int64_t i = 0; i < n; ++i) {
        Vec x = g.cell_center(g.cell_coords(i));
        int owners = 0;
        for (const auto& k : kids) {
            bool inside = true;
            for (int a = 0; a < 2; ++a)
                if (x[a] < k.lo(a) || x[a] >= k.hi(a)) inside = false;
            if (inside) ++owners;
        }
        CHECK(owners == 1);
    }
}

TEST_CASE("cube averages: constants, odd symmetry, affine") {
    TriadicCube cube = TriadicCube::centered(2, 1);
    Grid g = Grid::cube_box(cube, 4);
    ScalarField f(g, Centering::Cell);

    for (auto& v : f.data) v = 3.25;
    CHECK(cube_average(f, cube) == doctest::Approx(3.25).epsilon(1e-14));

    int64_t n = g.num_cells();
    for (int64_t i = 0; i < n; ++i) {
        Vec x = g.cell_center(g.cell_coords(i));
        f.data[static_cast<size_t>(i)] = x[0] * x[0] * x[0] + 0.5 * x[1];  // odd about center
    }
    CHECK(std::abs(cube_average(f, cube)) < 1e-12);

    for (int64_t i = 0; i < n; ++i)
        f.data[static_cast<size_t>(i)] = g.cell_center(g.cell_coords(i))[0];  // f = x1
    CHECK(std::abs(cube_average(f, cube)) < 1e-12);

    CHECK_THROWS(cube_average(f, TriadicCube::centered(2, 2)));  // outside grid
}

TEST_CASE("heat mask mass is renormalized to one") {
    Grid g = Grid::torus(2, 16, 2);
    Vec z(2, {8.0, 8.0});
    HeatKernelMask m = make_heat_mask(g, z, 2.0);
    CHECK(std::abs(m.mass() - 1.0) <= 1e-6);
    for (double w : m.weights) CHECK(w >= 0.0);
}

TEST_CASE("heat convolution preserves constants") {
    Grid g = Grid::torus(2, 8, 4);
    ScalarField f(g, Centering::Cell, 2.5);
    ScalarField out = heat_convolve(f, 0.7);
    for (double v : out.data) CHECK(v == doctest::Approx(2.5).epsilon(1e-8));

    // non-periodic route
    Grid gb = Grid::cube_box(TriadicCube::centered(2, 1), 4);
    ScalarField fb(gb, Centering::Cell, -1.25);
    ScalarField outb = heat_convolve(fb, 0.5);
    for (double v : outb.data) CHECK(v == doctest::Approx(-1.25).epsilon(1e-8));
}

TEST_CASE("heat semigroup identity on the torus") {
    Grid g = Grid::torus(2, 8, 8);
    ScalarField f(g, Centering::Cell);
    HashKey key(7);
    for (size_t i = 0; i < f.data.size(); ++i) f.data[i] = u01(key, i) - 0.5;
    double r = 0.5, rho = 0.75;
    ScalarField two_step = heat_convolve(heat_convolve(f, r), rho);
    ScalarField one_step = heat_convolve(f, std::sqrt(r * r + rho * rho));
    double num = 0, den = 0;
    for (size_t i = 0; i < f.data.size(); ++i) {
        num += (two_step.data[i] - one_step.data[i]) * (two_step.data[i] - one_step.data[i]);
        den += one_step.data[i] * one_step.data[i];
    }
    CHECK(std::sqrt(num / den) < 1e-6);
}

TEST_CASE("discrete delta spreads to the heat kernel profile") {
    Grid g = Grid::torus(2, 16, 4);
    ScalarField f(g, Centering::Cell);
    // delta with unit mass at the cell containing the origin-ish corner
    std::array<int64_t, kMaxDim> c0{0, 0, 0};
    f.data[static_cast<size_t>(g.cell_index(c0))] = 1.0 / g.cell_volume();
    double r = 1.0;
    ScalarField out = heat_convolve(f, r);
    Vec x0 = g.cell_center(c0);
    int64_t n = g.num_cells();
    for (int64_t i = 0; i < n; ++i) {
        Vec x = g.cell_center(g.cell_coords(i));
        Vec dx(2);
        double dist2 = 0;
        for (int a = 0; a < 2; ++a) {
            double d = x[a] - x0[a];
            double L = g.side_length(a);
            d -= L * std::nearbyint(d / L);
            dx[a] = d;
            dist2 += d * d;
        }
        if (dist2 > 9.0 * r * r) continue;  // |x| <= 3r
        double expect = heat_kernel(2, r * r, dx);
        CHECK(out.data[static_cast<size_t>(i)] ==
              doctest::Approx(expect).epsilon(0.01));
    }
}

TEST_CASE("mollifier: unit mass, constants and affine preserved") {
    Mollifier mol = make_mollifier(2, 0.25, 0.0625);
    double mass = 0;
    for (double w : mol.weights) mass += w;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));

    Grid g = Grid::cube_box(TriadicCube::centered(2, 1), 8);
    ScalarField f(g, Centering::Cell);
    int64_t n = g.num_cells();
    for (int64_t i = 0; i < n; ++i)
        f.data[static_cast<size_t>(i)] = 2.0 * g.cell_center(g.cell_coords(i))[0] - 0.5;
    double eps = 0.25;
    ScalarField out = mollify(f, eps);
    // affine preserved exactly away from the boundary ring of width eps
    for (int64_t i = 0; i < n; ++i) {
        Vec x = g.cell_center(g.cell_coords(i));
        bool interior = true;
        for (int a = 0; a < 2; ++a)
            if (x[a] < g.origin[a] + eps || x[a] > g.origin[a] + g.side_length(a) - eps)
                interior = false;
        if (interior)
            CHECK(out.data[static_cast<size_t>(i)] ==
                  doctest::Approx(f.data[static_cast<size_t>(i)]).epsilon(1e-10));
    }
}

TEST_CASE("mollification error scales with the gradient") {
    // || f - f * zeta_eps || <= C eps || grad f || on a smooth test function
    Grid g = Grid::torus(1, 8, 32);
    ScalarField f(g, Centering::Cell);
    int64_t n = g.num_cells();
    double L = g.side_length(0);
    for (int64_t i = 0; i < n; ++i) {
        double x = g.cell_center(g.cell_coords(i))[0];
        f.data[static_cast<size_t>(i)] = std::sin(2 * M_PI * x / L);
    }
    double grad_norm = 2 * M_PI / L;  // sup |f'|
    for (double eps : {0.25, 0.5}) {
        ScalarField out = mollify(f, eps);
        double err = 0;
        for (int64_t i = 0; i < n; ++i)
            err = std::max(err, std::abs(out.data[static_cast<size_t>(i)] -
                                         f.data[static_cast<size_t>(i)]));
        CHECK(err <= 2.0 * eps * grad_norm);
    }
}
