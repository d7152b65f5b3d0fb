// Serial reference kernels against their OpenMP counterparts.
// Range argument: cells per axis of the unit square or cube.

#include <random>
#include <string>

#include <benchmark/benchmark.h>

#include "rtspectra/advection.hpp"
#include "rtspectra/kernels.hpp"
#include "rtspectra/projection.hpp"

using namespace rtspectra;

namespace {

struct Fixture {
    StaggeredGrid grid;
    ScalarField rho;
    VectorField u;

    explicit Fixture(int dim, int n) : grid(StaggeredGrid::unit_box(dim, n)), rho(grid), u(grid) {
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> d(-1.0, 1.0);
        for (double& x : rho.values()) x = 2.0 + d(rng);
        for (double& x : u.flat()) x = d(rng);
        u.enforce_no_slip();
        u = leray_project(u, 1e-10);
    }
    double dt() const { return 0.5 / advection::cfl_rate(u); }
};

template <auto Kernel>
void density(benchmark::State& st, int dim) {
    const Fixture f(dim, static_cast<int>(st.range(0)));
    ScalarField out(f.grid);
    const double dt = f.dt();
    for (auto _ : st) {
        Kernel(f.rho, f.u, dt, out);
        benchmark::DoNotOptimize(out.values().data());
    }
    st.SetItemsProcessed(st.iterations() * f.grid.num_cells());
}

template <auto Kernel>
void vector_op(benchmark::State& st, int dim) {
    const Fixture f(dim, static_cast<int>(st.range(0)));
    VectorField out(f.grid);
    for (auto _ : st) {
        Kernel(f.u, out);
        benchmark::DoNotOptimize(out.flat().data());
    }
    st.SetItemsProcessed(st.iterations() * f.grid.num_cells());
}

template <auto Kernel>
void divergence(benchmark::State& st, int dim) {
    const Fixture f(dim, static_cast<int>(st.range(0)));
    ScalarField out(f.grid);
    for (auto _ : st) {
        Kernel(f.u, out);
        benchmark::DoNotOptimize(out.values().data());
    }
    st.SetItemsProcessed(st.iterations() * f.grid.num_cells());
}

}  // namespace

template <class F>
void pair(const std::string& name, F serial, F parallel) {
    for (int dim : {2, 3}) {
        const std::string tag = "_" + std::to_string(dim) + "d";
        const auto lo = dim == 2 ? 64 : 16, hi = dim == 2 ? 512 : 64;
        benchmark::RegisterBenchmark((name + "_serial" + tag).c_str(), serial, dim)->RangeMultiplier(2)->Range(lo, hi);
        benchmark::RegisterBenchmark((name + "_omp" + tag).c_str(), parallel, dim)->RangeMultiplier(2)->Range(lo, hi);
    }
}

int main(int argc, char** argv) {
    namespace ar = advection::reference;
    namespace ap = advection::omp;
    namespace kr = kernels::reference;
    namespace kp = kernels::omp;
    pair("upwind", density<ar::upwind_density>, density<ap::upwind_density>);
    pair("fct", density<ar::fct_density>, density<ap::fct_density>);
    pair("momentum", vector_op<ar::momentum>, vector_op<ap::momentum>);
    pair("laplacian", vector_op<kr::laplacian>, vector_op<kp::laplacian>);
    pair("divergence", divergence<kr::divergence>, divergence<kp::divergence>);
    benchmark::Initialize(&argc, argv);
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
