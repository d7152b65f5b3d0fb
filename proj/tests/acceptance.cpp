// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [criterion ids...]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracle/dense_oracle.hpp"
#include "rtspectra/advection.hpp"
#include "rtspectra/evolution.hpp"
#include "rtspectra/experiments.hpp"
#include "rtspectra/growth.hpp"
#include "rtspectra/operators.hpp"
#include "rtspectra/projection.hpp"
#include "test_support.hpp"

using namespace rtspectra;

namespace {

const PhysicalParams kParams{0.1, 1.0};

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

StaggeredGrid box(int dim, std::array<int, 3> n, std::array<double, 3> len) {
    BoxDomain d;
    d.dim = dim;
    d.lengths = len;
    d.gravity_axis = dim - 1;
    return StaggeredGrid(d, n);
}

std::vector<StaggeredGrid> algebra_grids() {
    return {StaggeredGrid::unit_box(2, 16), box(2, {12, 20, 1}, {2.0, 1.0, 1.0}), box(3, {6, 5, 7}, {1.0, 0.75, 1.25})};
}

// 1 ---------------------------------------------------------------------------
Verdict operator_algebra() {
    std::mt19937_64 rng(2024);
    const auto grids = algebra_grids();
    double dual = 0, idem = 0, orth = 0, sym = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const StaggeredGrid& g = grids[trial % grids.size()];
        const ScalarField p = testing::random_scalar(g, rng);
        const VectorField v = testing::random_interior(g, rng);
        const VectorField w = testing::random_interior(g, rng);
        const double hsum = 1.0 / g.h(0) + 1.0 / g.h(1) + (g.dim() == 3 ? 1.0 / g.h(2) : 0.0);

        // <grad p, v> = -<p, div v>
        const double lhs = unweighted_inner(discrete_gradient(p), v);
        const double rhs = cell_inner(p, discrete_divergence(v));
        dual = std::max(dual, std::abs(lhs + rhs) / (std::sqrt(cell_inner(p, p) * unweighted_inner(v, v)) * hsum));

        // <L v, w> = <v, L w>
        const double a = unweighted_inner(discrete_laplacian(v), w);
        const double b = unweighted_inner(v, discrete_laplacian(w));
        sym = std::max(sym, std::abs(a - b) / (discrete_laplacian(v).l2_norm() * w.l2_norm()));

        // P^2 = P and range(P) orthogonal to range(I - P)
        const Projector proj(g, 1e-14);
        const VectorField pv = proj.project(v);
        const VectorField pw = proj.project(w);
        idem = std::max(idem, (proj.project(pv) - pv).l2_norm() / v.l2_norm());
        orth = std::max(orth, std::abs(unweighted_inner(pv, w - pw)) / (v.l2_norm() * w.l2_norm()));
    }
    const bool ok = dual <= 1e-12 && sym <= 1e-12 && idem <= 1e-10 && orth <= 1e-10;
    return {ok, "max rel: div/grad " + fmt("%.2e", dual) + ", laplacian symmetry " + fmt("%.2e", sym) +
                    ", idempotence " + fmt("%.2e", idem) + ", orthogonality " + fmt("%.2e", orth) +
                    " (100 cases each)"};
}

// 2 ---------------------------------------------------------------------------
Verdict oracle_equivalence() {
    const auto p = DensityProfile::linear(1, 1);
    oracle::Box b;
    b.n = {8, 8, 1};
    const auto as = oracle::assemble(b, [&](double z) { return p.rho(z); }, [&](double z) { return p.drho(z); });
    const SpectralModel m(StaggeredGrid::unit_box(2, 8), p, kParams);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const double s = 0.05 * i;
        worst = std::max(worst, std::abs(alpha(s, m).eigenvalue - oracle::alpha(as, s, kParams.mu, kParams.g)));
    }
    GrowthOptions o;
    o.cross_check = false;
    const GrowthRateResult r = solve_growth_rate(m, o);
    const double ref = oracle::tabulated_fixed_point(as, kParams.mu, kParams.g, 1.0, 20000);
    const double gap = r.lambda ? std::abs(*r.lambda - ref) : INFINITY;
    return {worst <= 1e-8 && gap <= 1e-6,
            "8x8: max |alpha - dense| " + fmt("%.2e", worst) + " over 20 s; |Lambda - tabulated| " + fmt("%.2e", gap)};
}

// 3 ---------------------------------------------------------------------------
Verdict variational_certificates() {
    bool ok = true;
    std::ostringstream d;
    for (const char* spec : {"linear(1,1)", "exponential(1,0.5)"}) {
        const auto p = DensityProfile::parse(spec);
        const SpectralModel m(StaggeredGrid::unit_box(2, 16), p, kParams);
        std::vector<double> s;
        const double s_max = std::sqrt(m.alpha_upper_bound());
        for (int i = 0; i < 20; ++i) s.push_back(s_max * i / 19.0);
        const AlphaCurve c = sample_alpha_curve(m, s);
        const GrowthRateResult r = solve_growth_rate(m);
        const double defect = r.lambda ? std::abs(r.fixed_point_defect()) : INFINITY;
        const bool here = c.has_certificate && c.monotone(1e-9) && c.lower_bound_holds(1e-9) &&
                          c.upper_bound_holds(1e-9) && defect <= 1e-8;
        ok = ok && here;
        d << spec << ": bump certificate " << c.has_certificate << ", monotone " << c.monotone(1e-9) << ", >= c3 - c4 s " << c.lower_bound_holds(1e-9)
          << ", <= g sup(rho'/rho) " << c.upper_bound_holds(1e-9) << ", |L^2 - alpha(L)| " << fmt("%.1e", defect)
          << "; ";
    }
    return {ok, d.str()};
}

// 4, 5 share the growth solves ------------------------------------------------
struct Solved {
    std::string label;
    GrowthRateResult r;
};

const std::vector<Solved>& unstable_solves() {
    static const std::vector<Solved> v = [] {
        std::vector<Solved> out;
        for (const char* spec : {"linear(1,1)", "exponential(1,1)"})
            for (int n : {16, 24}) {
                const SpectralModel m(StaggeredGrid::unit_box(2, n), DensityProfile::parse(spec), kParams);
                out.push_back({std::string(spec) + "@" + std::to_string(n), solve_growth_rate(m)});
            }
        return out;
    }();
    return v;
}

Verdict duality() {
    bool ok = true;
    double worst = 0.0;
    for (const auto& s : unstable_solves()) {
        if (!s.r.lambda || !s.r.lambda_N) {
            ok = false;
            continue;
        }
        const double rel = std::abs(*s.r.lambda - *s.r.lambda_N) / *s.r.lambda;
        worst = std::max(worst, rel);
        ok = ok && rel <= 1e-6;
    }
    return {ok, "max |Lambda - Lambda_N| / Lambda " + fmt("%.2e", worst) + " over 2 profiles x 2 grids"};
}

Verdict pde_residual_check() {
    bool ok = true;
    double worst = 0.0;
    for (const auto& s : unstable_solves()) {
        worst = std::max(worst, s.r.pde_residual);
        ok = ok && s.r.unstable() && s.r.pde_residual <= 1e-6 && s.r.nondegeneracy.v3_nonzero &&
             s.r.nondegeneracy.horizontal_nonzero;
    }
    return {ok, "max relative residual " + fmt("%.2e", worst) + ", nondegeneracy flags all true: " +
                    (ok ? "yes" : "no")};
}

// 6 ---------------------------------------------------------------------------
Verdict linear_evolution() {
    const ExperimentSetup s{StaggeredGrid::unit_box(2, 24), DensityProfile::linear(1, 1), kParams, {}, 1};
    SharpGrowthConfig cfg;
    cfg.n_random = 20;
    const SharpGrowthResult r = run_sharp_growth(s, cfg);
    const double e = std::abs(r.eigen.rate / r.lambda - 1.0);
    const bool ok = e <= 0.02 && r.max_random_rate <= 1.02 * r.lambda && r.random.size() >= 20;
    return {ok, "24x24: eigenmode rate/Lambda " + fmt("%.4f", r.eigen.rate / r.lambda) + ", max of " +
                    std::to_string(r.random.size()) + " random rates/Lambda " + fmt("%.4f", r.max_random_rate / r.lambda)};
}

// 7 ---------------------------------------------------------------------------
Verdict stability() {
    const ExperimentSetup s{StaggeredGrid::unit_box(2, 16), DensityProfile::linear(2, -1), kParams, {}, 1};
    StabilityConfig cfg;
    cfg.amplitudes = {5e-3};
    const StabilityResult r = run_stability_suite(s, cfg);
    bool ok = r.constant_gradient && r.runs.size() == 2;
    std::ostringstream d;
    d << "rho = 2 - x3, 16x16: ";
    for (const auto& run : r.runs) {
        const bool p = run.report.identity_ok && run.report.decay_ok && run.passed().value_or(false);
        ok = ok && p;
        d << to_string(run.mode) << " identity ratio " << fmt("%.3f", run.report.max_identity_ratio) << ", H1 < 1% at t "
          << fmt("%.0f", run.t_final) << "; ";
    }
    return {ok, d.str()};
}

// 8 ---------------------------------------------------------------------------
Verdict escape_time() {
    const ExperimentSetup s{StaggeredGrid::unit_box(2, 24), DensityProfile::linear(1, 1), kParams, {}, 1};
    const EscapeTimeResult r = run_escape_time(s, {});
    return {r.all_crossed && r.slope_error <= 0.1,
            "24x24: slope * Lambda " + fmt("%.4f", r.slope * r.lambda_reference) + ", all three norms crossed: " +
                (r.all_crossed ? "yes" : "no")};
}

// 9 ---------------------------------------------------------------------------
Verdict mesh_convergence() {
    const auto p = DensityProfile::linear(1, 1);
    GrowthOptions o;
    o.cross_check = false;
    double l[3];
    const int n[3] = {16, 32, 64};
    for (int i = 0; i < 3; ++i) l[i] = *solve_growth_rate(SpectralModel(StaggeredGrid::unit_box(2, n[i]), p, kParams), o).lambda;
    const double order = std::log2(std::abs(l[0] - l[1]) / std::abs(l[1] - l[2]));

    const auto g = StaggeredGrid::unit_box(2, 16);
    const auto stable = DensityProfile::linear(2, -1);
    auto residual_at = [&](double dt) {
        SimState s = random_state(g, 3, 1e-2, EvolutionMode::Linear);
        Simulation sim(g, stable, kParams, EvolutionMode::Linear);
        RunOptions ro;
        ro.t_end = 2.0;
        ro.dt.fixed = dt;
        const StableDecayReport rep = stable_decay_report(sim.run(s, ro), kParams);
        return rep.identity_residuals.back();
    };
    const double ratio = residual_at(0.04) / residual_at(0.02);
    const bool ok = order >= 1.5 && ratio >= 1.7 && ratio <= 2.3;
    return {ok, "Richardson order " + fmt("%.2f", order) + " (16/32/64); identity residual ratio dt/(dt/2) " +
                    fmt("%.2f", ratio)};
}

// 10 --------------------------------------------------------------------------
Verdict max_principle() {
    double worst = 0.0;
    long steps = 0;
    const auto g = StaggeredGrid::unit_box(2, 24);
    const auto p = DensityProfile::linear(1, 1);
    const ProfileSamples smp = ProfileSamples::make(g, p);
    for (DensityScheme scheme : {DensityScheme::Fct, DensityScheme::Upwind, DensityScheme::SemiLagrangian}) {
        NonlinearOptions nl;
        nl.scheme = scheme;
        nl.bound_tol = 1.0;  // measure here instead of throwing inside the step
        Simulation sim(g, p, kParams, EvolutionMode::Nonlinear, nl);
        SimState s = random_state(g, 11, 5e-2, EvolutionMode::Nonlinear);
        DtPolicy policy;
        for (int k = 0; k < 150; ++k) {
            const double dt = policy.next(s, g, smp.rho_min, kParams.mu);
            const StepInfo info = sim.step(s, dt);
            const double scale = std::max(std::abs(info.density_max_before), std::abs(info.density_min_before));
            worst = std::max({worst, (info.density_max_after - info.density_max_before) / scale,
                              (info.density_min_before - info.density_min_after) / scale});
            ++steps;
        }
    }
    return {worst <= 1e-10, "max per-step overshoot of [min, max] relative to max|rho| " + fmt("%.2e", worst) +
                                " over " + std::to_string(steps) + " steps (fct, upwind, semi-Lagrangian)"};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {1, "operator algebra", operator_algebra},
        {2, "oracle equivalence", oracle_equivalence},
        {3, "variational certificates", variational_certificates},
        {4, "duality Lambda = Lambda_N", duality},
        {5, "PDE residual and nondegeneracy", pde_residual_check},
        {6, "linear evolution vs Lambda", linear_evolution},
        {7, "stable decay and Lyapunov identity", stability},
        {8, "escape time", escape_time},
        {9, "mesh convergence", mesh_convergence},
        {10, "max principle", max_principle},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failed = 0;
    for (const auto& c : all) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += v.pass ? 0 : 1;
        std::printf("%s [%d] %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d failed\n", failed);
    return failed ? 1 : 0;
}
