#include "rtspectra/growth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rtspectra/errors.hpp"
#include "rtspectra/field_io.hpp"
#include "rtspectra/json_io.hpp"
#include "rtspectra/operators.hpp"

namespace rtspectra {

namespace {

bool fixed_point_met(double s, double a, double tol) { return std::abs(s * s - a) <= tol * std::max(1.0, s * s); }

// Stopping rule of the bisection: relative to s^2 (so the Lambda^2 term of
// the boundary problem is resolved when Lambda < 1), absolute floor 1e-4 tol.
bool bisection_done(double s, double a, double tol) { return std::abs(s * s - a) <= tol * std::max(1e-4, s * s); }

double max_drho(const SpectralModel& m) {
    const auto d = m.samples().drho.values();
    return *std::max_element(d.begin(), d.end());
}

// alpha(0) for the report only: loose tolerance, failure tolerated
std::optional<double> loose_alpha0(const SpectralModel& m, const EigenOptions& base) {
    EigenOptions o = base;
    o.tol = std::max(base.tol, 1e-6);
    o.max_iterations = std::min(base.max_iterations, 500);
    try {
        return alpha(0.0, m, o).eigenvalue;
    } catch (const SolverError&) {
        return std::nullopt;
    }
}

}  // namespace

Nondegeneracy check_nondegeneracy(const VectorField& v) {
    const StaggeredGrid& g = v.grid();
    const double total = v.l2_norm();
    double horiz = 0.0;
    for (int a = 0; a < g.dim(); ++a)
        if (a != g.gravity_axis()) horiz += std::pow(v.component_l2_norm(a), 2);
    Nondegeneracy n;
    n.v3_nonzero = total > 0.0 && v.component_l2_norm(g.gravity_axis()) >= 1e-8 * total;
    n.horizontal_nonzero = total > 0.0 && std::sqrt(horiz) >= 1e-8 * total;
    return n;
}

double pde_residual(const EigenSolution& sol, double lambda, const SpectralModel& model) {
    if (!(lambda > 0.0)) throw PreconditionError("pde_residual: lambda must be positive");
    if (sol.velocity.grid() != model.grid() || sol.pressure.grid() != model.grid())
        throw GridMismatch("pde_residual: eigen solution lives on a different grid");
    VectorField inertia = model.apply_mass(sol.velocity);
    inertia *= lambda * lambda;
    const double scale = inertia.l2_norm();
    if (!(scale > 0.0)) throw PreconditionError("pde_residual: degenerate input (zero velocity field)");

    VectorField r = inertia;
    r.axpy(lambda, discrete_gradient(sol.pressure));
    r -= model.apply_operator(sol.velocity, lambda);
    r.enforce_no_slip();
    return r.l2_norm() / scale;
}

GrowthRateResult solve_growth_rate(const SpectralModel& model, const GrowthOptions& opts) {
    GrowthRateResult res;
    res.stratification = model.stratification();
    res.alpha0_bound = model.alpha_upper_bound();
    const double g = model.params().g;

    // Is alpha(0) > 0? The bump certifies it cheaply; otherwise ask the eigensolver.
    if (max_drho(model) <= 0.0) {
        // buoyancy <= 0 for every field: alpha(s) <= 0 for all s
        res.alpha0 = loose_alpha0(model, opts.eigen);
        return res;
    }
    bool certified = false;
    try {
        certified = bump_certificate(model).c3 > 0.0;
    } catch (const PreconditionError&) {
        certified = false;
    }
    if (!certified) {
        const std::optional<double> a0s = loose_alpha0(model, opts.eigen);
        if (!a0s) throw SolverError("solve_growth_rate: could not determine the sign of alpha(0)", 0.0);
        const double a0 = *a0s;
        res.bracket_history.emplace_back(0.0, a0);
        if (a0 <= opts.eigen.tol) {
            res.alpha0 = a0;
            if (res.stratification == Stratification::RtUnstable ||
                res.stratification == Stratification::UniformlyUnstable)
                throw SolverError("solve_growth_rate: profile is classified unstable but alpha(0) = " +
                                      std::to_string(a0) + " <= 0 on this grid (under-resolved?)",
                                  a0);
            return res;
        }
    }

    const UpperBracket ub = s_upper_bracket(model, opts.eigen);
    for (const auto& e : ub.evaluations) res.bracket_history.push_back(e);
    double lo = 0.0;
    double hi = std::sqrt(std::max(0.0, g * model.samples().ratio_max));
    if (ub.s_hat > 0.0) hi = std::min(hi, ub.s_hat);
    // every evaluated point with alpha > s^2 lies below the root
    for (const auto& [s, a] : ub.evaluations) {
        if (s * s < a) lo = std::max(lo, s);
        else hi = std::min(hi, s);
    }
    res.bracket_hi = hi;

    std::optional<EigenSolution> warm;
    std::optional<EigenSolution> best;
    double best_defect = INFINITY;
    for (int it = 0; it < opts.max_bisections; ++it) {
        const double mid = 0.5 * (lo + hi);
        EigenSolution sol = alpha(mid, model, opts.eigen, warm ? &*warm : nullptr);
        res.bracket_history.emplace_back(mid, sol.eigenvalue);
        res.bisections = it + 1;
        const double defect = mid * mid - sol.eigenvalue;
        if (std::abs(defect) < best_defect) {
            best_defect = std::abs(defect);
            best = sol;
        }
        if (bisection_done(mid, sol.eigenvalue, opts.fixed_point_tol)) break;
        (defect < 0.0 ? lo : hi) = mid;
        warm = std::move(sol);
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    }
    if (!best || !fixed_point_met(best->s, best->eigenvalue, opts.fixed_point_tol))
        throw SolverError("solve_growth_rate: bisection did not reach the fixed-point tolerance", best_defect);

    // The Ritz residual test scales with ||A|| ~ mu s / h^2; tighten once at
    // the root so the boundary-problem residual stays small on fine grids.
    EigenOptions polish = opts.eigen;
    polish.tol = opts.eigen.tol * opts.polish_factor;
    EigenSolution fin = alpha(best->s, model, polish, &*best);
    res.bracket_history.emplace_back(fin.s, fin.eigenvalue);
    res.lambda = fin.s;
    res.alpha_at_lambda = fin.eigenvalue;
    res.eigen = std::move(fin);
    res.pde_residual = pde_residual(res.eigen, *res.lambda, model);
    res.nondegeneracy = check_nondegeneracy(res.eigen.velocity);

    if (opts.cross_check && res.stratification == Stratification::UniformlyUnstable) {
        const DualSolution d = lambda_N(model, opts.eigen);
        res.lambda_N = d.lambda_n;
        res.lambda_vs_lambdaN_gap = std::abs(*res.lambda - d.lambda_n);
    }
    return res;
}

LambdaCrossCheck cross_check_lambda_N(const SpectralModel& model, const GrowthOptions& opts) {
    if (model.stratification() != Stratification::UniformlyUnstable)
        throw PreconditionError("cross_check_lambda_N: profile must be uniformly unstable (inf rho' > 0)");
    GrowthOptions o = opts;
    o.cross_check = true;
    const GrowthRateResult r = solve_growth_rate(model, o);
    if (!r.lambda || !r.lambda_N) throw SolverError("cross_check_lambda_N: no growth rate on this grid", 0.0);
    return {*r.lambda, *r.lambda_N, *r.lambda_vs_lambdaN_gap};
}

nlohmann::json GrowthRateResult::to_json(const SpectralModel& model) const {
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& [s, a] : bracket_history) hist.push_back({s, a});
    nlohmann::json j;
    j["lambda"] = lambda ? nlohmann::json(*lambda) : nlohmann::json(nullptr);
    j["verdict"] = lambda ? "unstable" : "no_instability";
    j["alpha_at_lambda"] = lambda ? nlohmann::json(alpha_at_lambda) : nlohmann::json(nullptr);
    j["alpha0"] = alpha0 ? nlohmann::json(*alpha0) : nlohmann::json(nullptr);
    j["alpha0_upper_bound"] = alpha0_bound;
    j["residual"] = pde_residual;
    j["eigen_residual"] = eigen.residual_norm;
    j["flags"] = {{"v3_nonzero", nondegeneracy.v3_nonzero}, {"horizontal_nonzero", nondegeneracy.horizontal_nonzero}};
    j["bracket_history"] = hist;
    j["bisections"] = bisections;
    j["lambda_N"] = lambda_N ? nlohmann::json(*lambda_N) : nlohmann::json(nullptr);
    j["lambda_vs_lambdaN_gap"] = lambda_vs_lambdaN_gap ? nlohmann::json(*lambda_vs_lambdaN_gap) : nlohmann::json(nullptr);
    j["grid"] = rtspectra::to_json(model.grid());
    j["profile"] = rtspectra::to_json(model.profile(), model.grid().length(model.grid().gravity_axis()));
    j["params"] = rtspectra::to_json(model.params());
    return j;
}

void GrowthRateResult::save_fields(const std::filesystem::path& dir) const {
    if (!lambda) return;
    std::filesystem::create_directories(dir);
    write_field(dir / "velocity.rtsf", eigen.velocity);
    write_field(dir / "pressure.rtsf", eigen.pressure);
    write_field(dir / "density.rtsf", eigen.density_mode);
}

}  // namespace rtspectra
