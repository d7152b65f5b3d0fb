#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "oracle/dense_oracle.hpp"
#include "rtspectra/errors.hpp"
#include "rtspectra/field_io.hpp"
#include "rtspectra/growth.hpp"
#include "test_support.hpp"

using namespace rtspectra;

namespace {

const PhysicalParams kParams{0.1, 1.0};

GrowthRateResult solve(int n, const DensityProfile& p, const GrowthOptions& o = {}) {
    return solve_growth_rate(SpectralModel(StaggeredGrid::unit_box(2, n), p, kParams), o);
}

}  // namespace

TEST_CASE("stable profile gives the no-instability verdict") {
    const GrowthRateResult r = solve(16, DensityProfile::linear(2, -1));
    CHECK_FALSE(r.unstable());
    CHECK(r.stratification == Stratification::Stable);
    REQUIRE(r.alpha0.has_value());
    CHECK(*r.alpha0 <= 0.0);
    CHECK(r.alpha0_bound == 0.0);
    const auto j = r.to_json(SpectralModel(StaggeredGrid::unit_box(2, 16), DensityProfile::linear(2, -1), kParams));
    CHECK(j["lambda"].is_null());
    CHECK(j["verdict"] == "no_instability");
}

TEST_CASE("fixed point matches the dense tabulation oracle") {
    const auto p = DensityProfile::linear(1, 1);
    oracle::Box b;
    b.n = {8, 8, 1};
    const auto as = oracle::assemble(b, [&](double z) { return p.rho(z); }, [&](double z) { return p.drho(z); });
    const double s_max = std::sqrt(kParams.g * 1.0);
    const double ref = oracle::tabulated_fixed_point(as, kParams.mu, kParams.g, s_max, 10000);
    const GrowthRateResult r = solve(8, p);
    REQUIRE(r.unstable());
    CHECK(std::abs(*r.lambda - ref) <= 1e-6 * ref);
}

TEST_CASE("growth rate certificates") {
    const auto p = DensityProfile::linear(1, 1);
    const SpectralModel m(StaggeredGrid::unit_box(2, 16), p, kParams);
    const GrowthRateResult r = solve_growth_rate(m);
    REQUIRE(r.unstable());
    const double L = *r.lambda;
    CHECK(std::abs(L * L - r.alpha_at_lambda) <= 1e-8 * std::max(1.0, L * L));
    CHECK(L <= std::sqrt(kParams.g * m.samples().ratio_max));
    CHECK(r.pde_residual <= 1e-6);
    CHECK(r.nondegeneracy.v3_nonzero);
    CHECK(r.nondegeneracy.horizontal_nonzero);
    CHECK(r.stratification == Stratification::UniformlyUnstable);
    REQUIRE(r.lambda_vs_lambdaN_gap.has_value());
    CHECK(*r.lambda_vs_lambdaN_gap <= 1e-6 * L);
    CHECK(r.bracket_history.size() >= static_cast<std::size_t>(r.bisections));

    // uniqueness: phi changes sign strictly across the root
    const double below = 0.9 * L;
    const double above = 1.1 * L;
    CHECK(below * below - alpha(below, m).eigenvalue < 0.0);
    CHECK(above * above - alpha(above, m).eigenvalue > 0.0);

    const auto j = r.to_json(m);
    CHECK(j["lambda"].get<double>() == L);
    CHECK(j["flags"]["v3_nonzero"].get<bool>());
    CHECK(j["bracket_history"].size() == r.bracket_history.size());
    CHECK(j["profile"]["spec"] == p.spec());
    CHECK(j["grid"]["cells"][0] == 16);
}

TEST_CASE("pde residual sensitivity and degenerate input") {
    const SpectralModel m(StaggeredGrid::unit_box(2, 16), DensityProfile::exponential(1.0, 1.0), kParams);
    const GrowthRateResult r = solve_growth_rate(m);
    REQUIRE(r.unstable());
    const double base = pde_residual(r.eigen, *r.lambda, m);
    CHECK(base <= 1e-6);

    std::mt19937_64 rng(11);
    EigenSolution noisy = r.eigen;
    VectorField n = testing::random_interior(m.grid(), rng);
    n *= 0.01 * noisy.velocity.max_abs();
    noisy.velocity += n;
    CHECK(pde_residual(noisy, *r.lambda, m) >= 10.0 * base);

    EigenSolution zero = r.eigen;
    zero.velocity = VectorField(m.grid());
    CHECK_THROWS_AS(pde_residual(zero, *r.lambda, m), PreconditionError);
    CHECK_THROWS_AS(pde_residual(r.eigen, 0.0, m), PreconditionError);
}

TEST_CASE("nondegeneracy flags") {
    const auto g = StaggeredGrid::unit_box(2, 8);
    VectorField vert(g);
    VectorField horiz(g);
    for (int j = 1; j < 8; ++j)
        for (int i = 0; i < 8; ++i) vert.at(1, i, j) = 1.0;
    for (int j = 0; j < 8; ++j)
        for (int i = 1; i < 8; ++i) horiz.at(0, i, j) = 1.0;
    const Nondegeneracy a = check_nondegeneracy(vert);
    CHECK(a.v3_nonzero);
    CHECK_FALSE(a.horizontal_nonzero);
    const Nondegeneracy b = check_nondegeneracy(horiz);
    CHECK_FALSE(b.v3_nonzero);
    CHECK(b.horizontal_nonzero);
}

TEST_CASE("lambda equals lambda_N") {
    for (const auto& p : {DensityProfile::linear(1, 1), DensityProfile::exponential(1.0, 1.0)}) {
        const LambdaCrossCheck c = cross_check_lambda_N(SpectralModel(StaggeredGrid::unit_box(2, 16), p, kParams));
        CHECK(c.gap <= 1e-6 * c.lambda);
    }
    // refinement: the gap stays at solver noise
    const auto p = DensityProfile::linear(1, 1);
    const LambdaCrossCheck coarse = cross_check_lambda_N(SpectralModel(StaggeredGrid::unit_box(2, 8), p, kParams));
    const LambdaCrossCheck fine = cross_check_lambda_N(SpectralModel(StaggeredGrid::unit_box(2, 16), p, kParams));
    CHECK(fine.gap <= coarse.gap + 1e-9 * fine.lambda);

    const SpectralModel band(StaggeredGrid::unit_box(2, 16), DensityProfile::tanh(2.0, 0.5, 0.5, 0.05), kParams);
    CHECK_THROWS_AS(cross_check_lambda_N(band), PreconditionError);
}

TEST_CASE("rt-unstable band has a growth rate but no dual check") {
    const GrowthRateResult r = solve(32, DensityProfile::tanh(2.0, 0.5, 0.5, 0.05));
    REQUIRE(r.unstable());
    CHECK(r.stratification == Stratification::RtUnstable);
    CHECK_FALSE(r.lambda_N.has_value());
    CHECK(r.pde_residual <= 1e-6);
    CHECK(r.nondegeneracy.v3_nonzero);
    CHECK(r.nondegeneracy.horizontal_nonzero);
}

TEST_CASE("mesh convergence of the growth rate") {
    const auto p = DensityProfile::linear(1, 1);
    GrowthOptions o;
    o.cross_check = false;
    const double l1 = *solve(16, p, o).lambda;
    const double l2 = *solve(32, p, o).lambda;
    const double l3 = *solve(64, p, o).lambda;
    const double order = std::log2(std::abs(l1 - l2) / std::abs(l2 - l3));
    MESSAGE("Richardson order " << order);
    CHECK(order >= 1.5);
}

TEST_CASE("3D growth rate and saved eigenfields") {
    BoxDomain d;
    d.dim = 3;
    d.gravity_axis = 2;
    const SpectralModel m(StaggeredGrid(d, {8, 8, 8}), DensityProfile::linear(1, 1), kParams);
    const GrowthRateResult r = solve_growth_rate(m);
    REQUIRE(r.unstable());
    CHECK(r.pde_residual <= 1e-6);
    CHECK(*r.lambda_vs_lambdaN_gap <= 1e-6 * *r.lambda);

    const auto dir = std::filesystem::temp_directory_path() / "rtspectra_growth_fields";
    std::filesystem::remove_all(dir);
    r.save_fields(dir);
    const VectorField v = read_vector_field(dir / "velocity.rtsf");
    CHECK((v - r.eigen.velocity).max_abs() == 0.0);
    CHECK(read_scalar_field(dir / "pressure.rtsf").size() == m.grid().num_cells());
    CHECK(std::filesystem::exists(dir / "density.rtsf"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("rho' peaking at the top wall still gets a bump and a growth rate") {
    const auto p = DensityProfile::exponential(1, 1);
    const SpectralModel m(StaggeredGrid::unit_box(2, 16), p, kParams);
    const BumpCertificate b = bump_certificate(m);
    CHECK(b.c3 > 0.0);
    CHECK(b.center + b.radius <= 1.0 + 1e-12);
    const GrowthRateResult r = solve_growth_rate(m);
    REQUIRE(r.unstable());
    CHECK(r.pde_residual <= 1e-6);
    REQUIRE(r.lambda_vs_lambdaN_gap.has_value());
    CHECK(*r.lambda_vs_lambdaN_gap <= 1e-6 * *r.lambda);
}
