// Solver hot paths: stiffness application, preconditioned solves, spectral
// kernels.
#include <benchmark/benchmark.h>

#include "homolab/energy.hpp"
#include "homolab/field.hpp"
#include "homolab/solver.hpp"
#include "homolab/torus.hpp"

using namespace homolab;

namespace {

FieldSpec checkerboard() {
    FieldSpec spec;
    spec.dim = 2;
    spec.lambda = 4.0;
    spec.kind = LawKind::Checkerboard;
    spec.checkerboard.values = {SymMat::identity(2, 1.0), SymMat::identity(2, 4.0)};
    spec.checkerboard.probs = {0.5, 0.5};
    return spec;
}

}  // namespace

static void BM_BoxStiffnessApply(benchmark::State& state) {
    int level = static_cast<int>(state.range(0));
    CoefficientSample field(checkerboard(), 1);
    Grid g = Grid::cube_box(TriadicCube::centered(2, level), 3);
    BoxOperator op(g, restrict_to_grid(field, g), Bc::Dirichlet);
    std::vector<double> u(static_cast<size_t>(g.num_nodes()), 1.0),
        out(static_cast<size_t>(g.num_nodes()));
    for (auto _ : state) {
        op.apply(u.data(), out.data());
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * g.num_cells());
}
BENCHMARK(BM_BoxStiffnessApply)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_DirichletSolve(benchmark::State& state) {
    int level = static_cast<int>(state.range(0));
    CoefficientSample field(checkerboard(), 2);
    Grid g = Grid::cube_box(TriadicCube::centered(2, level), 3);
    BoxOperator op(g, restrict_to_grid(field, g), Bc::Dirichlet);
    for (auto _ : state) {
        SolveReport rep = solve_dirichlet_affine(op, Vec::unit(2, 0));
        benchmark::DoNotOptimize(rep.value);
    }
}
BENCHMARK(BM_DirichletSolve)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_PeriodicCellSolve(benchmark::State& state) {
    int64_t L = state.range(0);
    CoefficientSample field(checkerboard(), 3);
    Grid torus = Grid::torus(2, L, 2);
    TorusOperator op(torus, restrict_to_torus(field, torus));
    for (auto _ : state) {
        SolveReport rep = solve_periodic_cell(op, Vec::unit(2, 0));
        benchmark::DoNotOptimize(rep.energy);
    }
}
BENCHMARK(BM_PeriodicCellSolve)->Arg(16)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_SpectralPoisson(benchmark::State& state) {
    int64_t n = state.range(0);
    Grid torus = Grid::torus(2, n, 1);
    SpectralPoisson sp(torus, SymMat::identity(2));
    std::vector<double> rhs(static_cast<size_t>(torus.num_cells())),
        u(static_cast<size_t>(torus.num_cells()));
    HashKey key(5);
    for (size_t i = 0; i < rhs.size(); ++i) rhs[i] = u01(key, i) - 0.5;
    double mean = 0;
    for (double v : rhs) mean += v;
    mean /= static_cast<double>(rhs.size());
    for (double& v : rhs) v -= mean;
    for (auto _ : state) {
        sp.solve(rhs.data(), u.data());
        benchmark::DoNotOptimize(u.data());
    }
    state.SetItemsProcessed(state.iterations() * torus.num_cells());
}
BENCHMARK(BM_SpectralPoisson)->Arg(64)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

static void BM_FieldEvalPoisson(benchmark::State& state) {
    FieldSpec spec;
    spec.dim = 2;
    spec.lambda = 4.0;
    spec.kind = LawKind::PoissonInclusions;
    spec.poisson.intensity = 1.0;
    spec.poisson.radius_min = 0.1;
    spec.poisson.radius_max = 0.4;
    spec.poisson.inside = SymMat::identity(2, 4.0);
    spec.poisson.outside = SymMat::identity(2, 1.0);
    CoefficientSample field(spec, 9);
    HashKey key(7);
    uint64_t ctr = 0;
    for (auto _ : state) {
        Vec x(2, {100.0 * u01(key, ctr++), 100.0 * u01(key, ctr++)});
        benchmark::DoNotOptimize(field.eval11(x));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FieldEvalPoisson);

static void BM_HeatConvolvePeriodic(benchmark::State& state) {
    Grid g = Grid::torus(2, 64, 2);
    ScalarField f(g, Centering::Cell);
    HashKey key(3);
    for (size_t i = 0; i < f.data.size(); ++i) f.data[i] = u01(key, i);
    for (auto _ : state) {
        ScalarField out = heat_convolve(f, 2.0);
        benchmark::DoNotOptimize(out.data.data());
    }
}
BENCHMARK(BM_HeatConvolvePeriodic)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
