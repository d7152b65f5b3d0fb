#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "rtspectra/errors.hpp"
#include "rtspectra/experiments.hpp"

using namespace rtspectra;
namespace fs = std::filesystem;

namespace {

const PhysicalParams kParams{0.1, 1.0};

ExperimentSetup setup(int n, DensityProfile p) { return {StaggeredGrid::unit_box(2, n), std::move(p), kParams, {}, 1}; }

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("rtspectra_exp_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("escape time: slope of T against ln(1/delta) is 1/Lambda") {
    const ExperimentSetup s = setup(16, DensityProfile::linear(1, 1));
    const EscapeTimeResult r = run_escape_time(s, {});
    REQUIRE(r.runs.size() == 4);
    CHECK(r.all_crossed);
    CHECK(r.monotone);
    CHECK(r.slope_error <= 0.1);
    CHECK(r.ok());
    for (const auto& run : r.runs) {
        CHECK(*run.escape_time == std::max({*run.t_rho, *run.t_vertical, *run.t_horizontal}));
        CHECK(*run.escape_time <= run.budget);
    }
    // each halving of delta costs about ln 2 / Lambda
    for (double inc : r.halving_increments) CHECK(inc == doctest::Approx(1.0).epsilon(0.1));

    const fs::path dir = scratch("escape");
    r.write(dir);
    CHECK(fs::exists(dir / "result.json"));
    CHECK(fs::exists(dir / "escape_time.dat"));
    CHECK(fs::exists(dir / "escape_fit.dat"));
}

TEST_CASE("escape time: data already at the threshold escapes at t = 0") {
    const ExperimentSetup s = setup(12, DensityProfile::linear(1, 1));
    const SpectralModel model(s.grid, s.profile, s.params);
    const GrowthRateResult g = solve_growth_rate(model);
    REQUIRE(g.unstable());
    EscapeTimeConfig cfg;
    const EscapeRun r = escape_run(s, g.eigen, *g.lambda, cfg.epsilon0, cfg);
    REQUIRE(r.crossed());
    CHECK(*r.escape_time == 0.0);
    const EscapeRun big = escape_run(s, g.eigen, *g.lambda, 4.0 * cfg.epsilon0, cfg);
    CHECK(*big.escape_time == 0.0);
    CHECK(big.budget == 0.0);
    CHECK_THROWS_AS(escape_run(s, g.eigen, *g.lambda, 0.0, cfg), PreconditionError);
    CHECK_THROWS_AS(escape_run(s, g.eigen, -1.0, 1e-3, cfg), PreconditionError);
}

TEST_CASE("escape time: configuration and profile preconditions") {
    EscapeTimeConfig c;
    c.deltas = {1e-3, 1e-2};
    CHECK_THROWS_AS(c.validate(), PreconditionError);
    c.deltas = {0.1};
    CHECK_THROWS_AS(c.validate(), PreconditionError);  // eps0 must exceed delta
    c.deltas = {};
    CHECK_THROWS_AS(c.validate(), PreconditionError);
    CHECK_THROWS_AS(run_escape_time(setup(8, DensityProfile::linear(2, -1)), {}), PreconditionError);
}

TEST_CASE("mode norms") {
    ModeNorms m{3.0, 1.0, 2.0};
    CHECK(m.m0() == 1.0);
}

TEST_CASE("sharp growth on a small grid") {
    const ExperimentSetup s = setup(16, DensityProfile::linear(1, 1));
    SharpGrowthConfig cfg;
    cfg.n_random = 3;
    const SharpGrowthResult r = run_sharp_growth(s, cfg);
    CHECK(r.random.size() == 3);
    CHECK(r.eigen_ok());
    CHECK(r.sharpness_ok());
    CHECK(r.max_random_rate <= 1.02 * r.lambda);
    CHECK(r.constant_ok());
    CHECK(r.eigen.dual.has_value());
    CHECK(r.dual_ok());
    CHECK(r.ok());
    const fs::path dir = scratch("sharp");
    r.write(dir);
    CHECK(fs::exists(dir / "growth_rates.dat"));
    CHECK(fs::exists(dir / "eigenmode_growth.dat"));
    CHECK_THROWS_AS(run_sharp_growth(setup(8, DensityProfile::linear(2, -1)), cfg), PreconditionError);
}

TEST_CASE("stability suite: linear and nonlinear runs on a constant gradient") {
    const ExperimentSetup s = setup(12, DensityProfile::linear(2, -1));
    StabilityConfig cfg;
    cfg.amplitudes = {5e-3};
    const StabilityResult r = run_stability_suite(s, cfg);
    CHECK(r.constant_gradient);
    REQUIRE(r.runs.size() == 2);
    for (const auto& run : r.runs) {
        REQUIRE(run.passed().has_value());
        CHECK(*run.passed());
        CHECK(run.report.decay_ok);
        CHECK(run.report.identity_ok);
    }
    CHECK(r.ok());
    const fs::path dir = scratch("stab");
    r.write(dir);
    CHECK(fs::exists(dir / "result.json"));
}

TEST_CASE("stability suite: Lyapunov functional scales with the amplitude squared") {
    const ExperimentSetup s = setup(10, DensityProfile::linear(2, -1));
    StabilityConfig cfg;
    cfg.amplitudes = {1e-3, 2e-3, 4e-3, 8e-3};
    cfg.nonlinear = false;
    cfg.t_max = 0.5;
    const StabilityResult r = run_stability_suite(s, cfg);
    REQUIRE(r.amplitude_scaling_errors.size() == 3);
    for (double e : r.amplitude_scaling_errors) CHECK(std::abs(e) <= 1e-12);
}

TEST_CASE("stability suite: non-constant gradient is labeled, not judged") {
    const ExperimentSetup s = setup(10, DensityProfile::exponential(2, -0.5));
    StabilityConfig cfg;
    cfg.amplitudes = {1e-3};
    cfg.t_max = 1.0;
    const StabilityResult r = run_stability_suite(s, cfg);
    CHECK(!r.constant_gradient);
    REQUIRE(r.runs.size() == 2);
    CHECK(r.runs[0].passed().has_value());  // linear runs are always in scope
    CHECK(!r.runs[1].passed().has_value());
    CHECK(r.to_json()["runs"][1]["passed"].is_null());
}

TEST_CASE("stability suite: refuses data outside the density band") {
    const ExperimentSetup s = setup(10, DensityProfile::linear(2, -1));
    StabilityConfig cfg;
    cfg.amplitudes = {1e-3};
    cfg.density_bound = 1.5;  // below max rho = 2
    CHECK_THROWS_AS(run_stability_suite(s, cfg), PreconditionError);
    CHECK_THROWS_AS(run_stability_suite(setup(10, DensityProfile::linear(1, 1)), {}), PreconditionError);
    cfg.amplitudes = {};
    CHECK_THROWS_AS(run_stability_suite(s, cfg), PreconditionError);
}
