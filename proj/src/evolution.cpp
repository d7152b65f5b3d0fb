#include "rtspectra/evolution.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>

#include "rtspectra/advection.hpp"
#include "rtspectra/errors.hpp"
#include "rtspectra/field_io.hpp"
#include "rtspectra/operators.hpp"
#include "rtspectra/spectral.hpp"

namespace rtspectra {

namespace {

double min_h(const StaggeredGrid& g) {
    double h = g.h(0);
    for (int a = 1; a < g.dim(); ++a) h = std::min(h, g.h(a));
    return h;
}

double sum_sq_over(const ScalarField& rho, const ScalarField& w) {
    // sum rho^2 / w * V
    double s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) s += rho[i] * rho[i] / w[i];
    return s * rho.grid().cell_volume();
}

double rel_divergence(const VectorField& u) {
    const double un = u.l2_norm();
    if (un == 0.0) return 0.0;
    return discrete_divergence(u).l2_norm() * min_h(u.grid()) / un;
}

}  // namespace

std::string to_string(EvolutionMode m) { return m == EvolutionMode::Linear ? "linear" : "nonlinear"; }
std::string to_string(DensityScheme s) {
    switch (s) {
        case DensityScheme::Upwind: return "upwind";
        case DensityScheme::Fct: return "fct";
        case DensityScheme::SemiLagrangian: return "semi_lagrangian";
    }
    return "?";
}

SimState SimState::zero(const StaggeredGrid& grid, EvolutionMode mode) {
    SimState s;
    s.rho_pert = ScalarField(grid);
    s.velocity = VectorField(grid);
    s.pressure = ScalarField(grid);
    s.mode = mode;
    return s;
}

SimState eigenmode_state(const EigenSolution& sol, double amplitude, EvolutionMode mode) {
    const double e = std::sqrt(std::pow(sol.density_mode.l2_norm(), 2) + std::pow(discrete_h2_norm(sol.velocity), 2));
    if (!(e > 0.0)) throw PreconditionError("eigenmode_state: eigen solution is zero");
    const double f = amplitude / e;
    SimState s;
    s.rho_pert = f * sol.density_mode;
    s.velocity = f * sol.velocity;
    s.pressure = f * sol.pressure;
    s.mode = mode;
    return s;
}

SimState random_state(const StaggeredGrid& grid, std::uint64_t seed, double amplitude, EvolutionMode mode,
                      std::optional<double> ell) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    const double l = ell.value_or(4.0 * min_h(grid));
    const double kappa = -l * l;

    SimState s = SimState::zero(grid, mode);
    std::vector<double> tmp;
    {
        for (double& x : s.rho_pert.values()) x = nd(rng);
        const SeparableSolver cells = SeparableSolver::neumann_cells(grid);
        tmp.assign(s.rho_pert.size(), 0.0);
        for (int pass = 0; pass < 2; ++pass) {
            cells.solve(1.0, kappa, s.rho_pert.values(), tmp);
            std::copy(tmp.begin(), tmp.end(), s.rho_pert.values().begin());
        }
    }
    for (double& x : s.velocity.flat()) x = nd(rng);
    s.velocity.enforce_no_slip();
    for (int a = 0; a < grid.dim(); ++a) {
        const SeparableSolver fs = SeparableSolver::velocity_component(grid, a);
        auto c = s.velocity.comp(a);
        tmp.assign(c.size(), 0.0);
        for (int pass = 0; pass < 2; ++pass) {
            fs.solve(1.0, kappa, c, tmp);
            std::copy(tmp.begin(), tmp.end(), c.begin());
        }
    }
    s.velocity.enforce_no_slip();
    s.velocity = leray_project(s.velocity, 1e-12);
    const double n = std::sqrt(std::pow(s.rho_pert.l2_norm(), 2) + std::pow(s.velocity.l2_norm(), 2));
    s.rho_pert *= amplitude / n;
    s.velocity *= amplitude / n;
    return s;
}

// ---------------------------------------------------------------------------

LinearStepper::LinearStepper(const StaggeredGrid& grid, const DensityProfile& profile, const PhysicalParams& params,
                             double projection_tol)
    : grid_(grid),
      params_(params),
      samples_(ProfileSamples::make(grid, profile)),
      projector_(grid, projection_tol),
      viscous_(grid) {
    params_.validate();
    projector_.set_density(samples_.face_rho);
}

StepInfo LinearStepper::step(SimState& s, double dt) const {
    if (!(dt > 0.0)) throw PreconditionError("step_linear: dt must be positive");
    require_same_grid(grid_, s.velocity.grid(), "step_linear");
    StepInfo info;
    // (i) implicit viscosity with the buoyancy of the current density
    VectorField rhs = s.velocity;
    const auto fr = samples_.face_rho.flat();
    auto r = rhs.flat();
    for (std::size_t i = 0; i < r.size(); ++i) r[i] *= fr[i];
    rhs.axpy(-dt * params_.g, cells_to_gravity(s.rho_pert));
    rhs.axpy(-dt, discrete_gradient(s.pressure));
    CgStats vs;
    VectorField u = viscous_.solve(samples_.face_rho, dt * params_.mu, rhs, &s.velocity, &vs);
    info.viscous_iterations = vs.iterations;
    // (ii) rho_f-weighted projection of the pressure increment
    ScalarField phi(grid_);
    projector_.project_in_place(u, &phi);
    s.velocity = std::move(u);
    s.pressure.axpy(1.0 / dt, phi);
    // (iii) density with the new velocity; the buoyancy cross terms of the
    // Lyapunov/dual balance then cancel exactly
    const ScalarField w = gravity_to_cells(s.velocity);
    const auto d = samples_.drho.values();
    for (std::size_t i = 0; i < w.size(); ++i) s.rho_pert[i] -= dt * d[i] * w[i];
    s.t += dt;
    ++s.step;
    return info;
}

// ---------------------------------------------------------------------------

NonlinearStepper::NonlinearStepper(const StaggeredGrid& grid, const DensityProfile& profile,
                                   const PhysicalParams& params, const NonlinearOptions& opts)
    : grid_(grid),
      params_(params),
      samples_(ProfileSamples::make(grid, profile)),
      opts_(opts),
      projector_(grid, opts.projection_tol),
      viscous_(grid) {
    params_.validate();
}

StepInfo NonlinearStepper::step(SimState& s, double dt) {
    if (!(dt > 0.0)) throw PreconditionError("step_nonlinear: dt must be positive");
    require_same_grid(grid_, s.velocity.grid(), "step_nonlinear");
    StepInfo info;
    ScalarField rho = samples_.rho + s.rho_pert;
    info.density_min_before = rho.min();
    info.density_max_before = rho.max();
    if (!(info.density_min_before > 0.0))
        throw PreconditionError("step_nonlinear: total density must stay positive");

    // (i) momentum: explicit advection, implicit viscosity, current density
    const VectorField face_rho = face_average(rho);
    VectorField adv(grid_);
    advection::omp::momentum(s.velocity, adv);
    VectorField rhs = s.velocity;
    rhs.axpy(-dt, adv);
    {
        auto r = rhs.flat();
        const auto fr = face_rho.flat();
        for (std::size_t i = 0; i < r.size(); ++i) r[i] *= fr[i];
    }
    rhs.axpy(-dt * params_.g, cells_to_gravity(s.rho_pert));
    rhs.axpy(-dt, discrete_gradient(s.pressure));
    CgStats vs;
    VectorField u = viscous_.solve(face_rho, dt * params_.mu, rhs, &s.velocity, &vs);
    info.viscous_iterations = vs.iterations;

    // (ii) variable-density projection, zero-mean pressure
    projector_.set_density(face_rho);
    ScalarField phi(grid_);
    projector_.project_in_place(u, &phi);
    s.velocity = std::move(u);
    s.pressure.axpy(1.0 / dt, phi);
    const double mean = s.pressure.mean();
    for (double& x : s.pressure.values()) x -= mean;

    // (iii) transport of the total density by the new velocity
    ScalarField rho_new(grid_);
    switch (opts_.scheme) {
        case DensityScheme::Upwind: advection::omp::upwind_density(rho, s.velocity, dt, rho_new); break;
        case DensityScheme::Fct: advection::omp::fct_density(rho, s.velocity, dt, rho_new); break;
        case DensityScheme::SemiLagrangian: advection::semi_lagrangian_density(rho, s.velocity, dt, rho_new); break;
    }
    info.density_min_after = rho_new.min();
    info.density_max_after = rho_new.max();
    const double slack = opts_.bound_tol * std::max(1.0, std::abs(info.density_max_before));
    if (info.density_min_after < info.density_min_before - slack ||
        info.density_max_after > info.density_max_before + slack) {
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "step_nonlinear: density bounds [%.17g, %.17g] left [%.17g, %.17g] at t = %g (CFL breach?)",
                      info.density_min_before, info.density_max_before, info.density_min_after,
                      info.density_max_after, s.t);
        throw SolverError(buf, std::max(info.density_min_before - info.density_min_after,
                                        info.density_max_after - info.density_max_before));
    }
    s.rho_pert = rho_new - samples_.rho;
    s.t += dt;
    ++s.step;
    return info;
}

// ---------------------------------------------------------------------------

double DtPolicy::next(const SimState& s, const StaggeredGrid& grid, double rho_min, double mu) const {
    double dt = std::numeric_limits<double>::infinity();
    const double h = min_h(grid);
    if (fixed) dt = *fixed;
    else if (viscous_limit) dt = viscous_factor * h * h * rho_min / mu;
    if (s.mode == EvolutionMode::Nonlinear) {
        const double rate = advection::cfl_rate(s.velocity);
        if (rate > 0.0) dt = std::min(dt, cfl / rate);
    }
    dt = std::min(dt, max_dt);
    if (!std::isfinite(dt) || !(dt > 0.0)) throw PreconditionError("DtPolicy: no finite positive time step");
    return dt;
}

nlohmann::json DtPolicy::to_json() const {
    nlohmann::json j;
    j["fixed"] = fixed ? nlohmann::json(*fixed) : nlohmann::json(nullptr);
    j["cfl"] = cfl;
    j["viscous_factor"] = viscous_factor;
    j["viscous_limit"] = viscous_limit;
    j["max_dt"] = std::isfinite(max_dt) ? nlohmann::json(max_dt) : nlohmann::json(nullptr);
    return j;
}

// ---------------------------------------------------------------------------

void MonitorTrace::append(const MonitorRecord& r) {
    if (!records.empty() && !(r.t > records.back().t))
        throw PreconditionError("MonitorTrace: records must be strictly increasing in t");
    records.push_back(r);
}

std::vector<std::string> MonitorTrace::columns() {
    return {"t",           "dt",           "rho_l2",          "u_l2",           "u3_l2",
            "uh_l2",       "grad_u_sq",    "h1",              "h2",             "ut_l2",
            "lyapunov",    "lyapunov_rate_scale", "dual_energy", "dual_rate_scale", "dissipation_integral",
            "rho_min",     "rho_max",      "div_rel"};
}

void MonitorTrace::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    const auto cols = columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    char buf[64];
    for (const auto& r : records) {
        const double v[] = {r.t,        r.dt,       r.rho_l2,   r.u_l2,   r.u3_l2,      r.uh_l2,
                            r.grad_u_sq, r.h1,      r.h2,       r.ut_l2,  r.lyapunov,   r.lyapunov_rate_scale,
                            r.dual_energy, r.dual_rate_scale, r.dissipation_integral, r.rho_min, r.rho_max,
                            r.div_max};
        for (std::size_t i = 0; i < std::size(v); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", v[i]);
            out << (i ? "," : "") << buf;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Monitor::Monitor(const StaggeredGrid& grid, const DensityProfile& profile, const PhysicalParams& params)
    : grid_(grid), params_(params), samples_(ProfileSamples::make(grid, profile)) {
    stable_ = samples_.drho.max() < 0.0;
    positive_ = samples_.drho.min() > 0.0;
}

double Monitor::lyapunov(const ScalarField& rho, const VectorField& u, const VectorField& face_rho) const {
    ScalarField neg = samples_.drho;
    neg *= -1.0;
    return params_.g * sum_sq_over(rho, neg) + face_weighted_inner(u, u, face_rho);
}

double Monitor::dual(const ScalarField& rho, const VectorField& u) const {
    return sum_sq_over(rho, samples_.drho) + face_weighted_inner(u, u, samples_.face_rho) / params_.g;
}

MonitorRecord Monitor::record(const SimState& cur, const SimState* prev, double dt, double dissipation_so_far) const {
    MonitorRecord r;
    const auto& u = cur.velocity;
    r.t = cur.t;
    r.dt = dt;
    r.rho_l2 = cur.rho_pert.l2_norm();
    r.u_l2 = u.l2_norm();
    const int ga = grid_.gravity_axis();
    double horiz = 0.0;
    for (int a = 0; a < grid_.dim(); ++a) {
        const double c = u.component_l2_norm(a);
        if (a == ga) r.u3_l2 = c;
        else horiz += c * c;
    }
    r.uh_l2 = std::sqrt(horiz);
    r.grad_u_sq = h1_seminorm_sq(u);
    r.h1 = std::sqrt(r.u_l2 * r.u_l2 + r.grad_u_sq);
    r.h2 = discrete_h2_norm(u);
    r.dissipation_integral = dissipation_so_far;
    r.div_max = rel_divergence(u);

    VectorField face_rho = samples_.face_rho;
    if (cur.mode == EvolutionMode::Nonlinear) {
        const ScalarField total = samples_.rho + cur.rho_pert;
        r.rho_min = total.min();
        r.rho_max = total.max();
        face_rho = face_average(total);
    }
    std::optional<ScalarField> drho;
    std::optional<VectorField> du;
    if (prev && dt > 0.0) {
        du = (1.0 / dt) * (u - prev->velocity);
        drho = (1.0 / dt) * (cur.rho_pert - prev->rho_pert);
        r.ut_l2 = du->l2_norm();
    }
    if (stable_) {
        r.lyapunov = lyapunov(cur.rho_pert, u, face_rho);
        if (du) r.lyapunov_rate_scale = lyapunov(*drho, *du, face_rho);
    }
    if (positive_) {
        r.dual_energy = dual(cur.rho_pert, u);
        if (du) r.dual_rate_scale = dual(*drho, *du);
    }
    return r;
}

// ---------------------------------------------------------------------------

Simulation::Simulation(const StaggeredGrid& grid, const DensityProfile& profile, const PhysicalParams& params,
                       EvolutionMode mode, const NonlinearOptions& nl)
    : grid_(grid), profile_(profile), params_(params), mode_(mode), monitor_(grid, profile, params) {
    profile_.validate_on(grid_);
    if (mode == EvolutionMode::Linear) linear_.emplace(grid, profile, params, nl.projection_tol);
    else nonlinear_.emplace(grid, profile, params, nl);
}

StepInfo Simulation::step(SimState& s, double dt) {
    if (s.mode != mode_) throw PreconditionError("Simulation: state mode does not match the stepper");
    return linear_ ? linear_->step(s, dt) : nonlinear_->step(s, dt);
}

MonitorTrace Simulation::run(SimState& s, const RunOptions& opts) {
    MonitorTrace trace;
    const ProfileSamples& smp = linear_ ? linear_->samples() : nonlinear_->samples();
    double dissipation = 0.0;
    trace.append(monitor_.record(s, nullptr, 0.0, dissipation));
    if (opts.stop && opts.stop(trace.back())) return trace;
    if (opts.checkpoint_every > 0) write_checkpoint(opts.checkpoint_dir, s);
    const double t_end = opts.t_end;
    for (long n = 0; n < opts.max_steps && s.t < t_end * (1.0 - 1e-14); ++n) {
        double rho_min = smp.rho_min;
        if (mode_ == EvolutionMode::Nonlinear) rho_min = (smp.rho + s.rho_pert).min();
        double dt = opts.dt.next(s, grid_, rho_min, params_.mu);
        // absorb a round-off sliver into the last step
        if (s.t + dt > t_end - 1e-6 * dt) dt = t_end - s.t;
        const SimState prev = s;
        step(s, dt);
        const MonitorRecord r0 = monitor_.record(s, &prev, dt, 0.0);
        dissipation += dt * r0.grad_u_sq;
        MonitorRecord r = r0;
        r.dissipation_integral = dissipation;
        trace.append(r);
        if (opts.checkpoint_every > 0 && s.step % opts.checkpoint_every == 0) write_checkpoint(opts.checkpoint_dir, s);
        if (opts.stop && opts.stop(r)) break;
    }
    return trace;
}

void write_checkpoint(const std::filesystem::path& dir, const SimState& s) {
    char name[32];
    std::snprintf(name, sizeof name, "step_%08ld", s.step);
    const auto d = dir / name;
    std::filesystem::create_directories(d);
    write_field(d / "rho.rtsf", s.rho_pert);
    write_field(d / "velocity.rtsf", s.velocity);
    write_field(d / "pressure.rtsf", s.pressure);
}

// ---------------------------------------------------------------------------

double measure_growth_rate(const MonitorTrace& trace, double t0, double t1) {
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    int n = 0;
    for (const auto& r : trace.records) {
        if (r.t < t0 || r.t > t1) continue;
        const double nrm = r.norm();
        if (!(nrm > 0.0)) continue;
        const double y = std::log(nrm);
        st += r.t;
        sy += y;
        stt += r.t * r.t;
        sty += r.t * y;
        ++n;
    }
    if (n < 10) throw PreconditionError("measure_growth_rate: need at least 10 records in the window");
    const double den = n * stt - st * st;
    return (n * sty - st * sy) / den;
}

StableDecayReport stable_decay_report(const MonitorTrace& trace, const PhysicalParams& params) {
    if (trace.size() < 2 || std::isnan(trace.records.front().lyapunov))
        throw PreconditionError("stable_decay_report: trace has no Lyapunov records (stable profile required)");
    StableDecayReport rep;
    const auto& recs = trace.records;
    const double l0 = recs.front().lyapunov;
    rep.zero_initial = l0 == 0.0;
    rep.h1_initial = recs.front().h1;
    rep.h1_final = recs.back().h1;
    rep.dissipation_integral = recs.back().dissipation_integral;
    double worst = 0.0;
    double sum = 0.0;
    double cmax = 0.0;
    for (std::size_t i = 1; i < recs.size(); ++i) {
        const auto& a = recs[i - 1];
        const auto& b = recs[i];
        const double res = std::abs((b.lyapunov - a.lyapunov) / b.dt + 2.0 * params.mu * b.grad_u_sq);
        rep.identity_residuals.push_back(res);
        sum += res;
        const double budget = 5.0 * b.dt * b.lyapunov_rate_scale;
        const double ratio = budget > 0.0 ? res / budget : (res > 0.0 ? INFINITY : 0.0);
        worst = std::max(worst, ratio);
        if (l0 > 0.0) cmax = std::max(cmax, (b.lyapunov + 2.0 * params.mu * b.dissipation_integral) / l0);
    }
    rep.mean_identity_residual = sum / static_cast<double>(recs.size() - 1);
    rep.max_identity_ratio = worst;
    rep.identity_ok = worst <= 1.0;
    rep.c_estimate = cmax;
    rep.decay_ok = rep.zero_initial || rep.h1_final < 0.01 * rep.h1_initial;
    if (worst > 10.0)
        throw SolverError("stable_decay_report: Lyapunov identity residual exceeds ten times its O(dt) budget "
                          "(ratio " + std::to_string(worst) + ")",
                          worst);
    return rep;
}

nlohmann::json StableDecayReport::to_json() const {
    return {{"zero_initial", zero_initial},
            {"max_identity_ratio", max_identity_ratio},
            {"identity_ok", identity_ok},
            {"mean_identity_residual", mean_identity_residual},
            {"dissipation_integral", dissipation_integral},
            {"c_estimate", zero_initial ? nlohmann::json(nullptr) : nlohmann::json(c_estimate)},
            {"h1_initial", h1_initial},
            {"h1_final", h1_final},
            {"decay_ok", decay_ok}};
}

DualEnergyAudit dual_energy_audit(const MonitorTrace& trace, double lambda, double eps) {
    if (trace.size() < 2 || std::isnan(trace.records.front().dual_energy))
        throw PreconditionError("dual_energy_audit: trace has no dual-energy records (uniformly unstable profile)");
    DualEnergyAudit a;
    const auto& recs = trace.records;
    for (std::size_t i = 1; i < recs.size(); ++i) {
        const double d0 = recs[i - 1].dual_energy;
        const double d1 = recs[i].dual_energy;
        if (d0 == 0.0) {
            if (d1 != 0.0) {
                ++a.violations;
                a.max_excess = INFINITY;
            }
            continue;
        }
        const double excess = d1 / (d0 * std::exp(2.0 * lambda * recs[i].dt)) - 1.0;
        a.max_excess = std::max(a.max_excess, excess);
        if (excess > eps) ++a.violations;
    }
    a.ok = a.violations == 0;
    const double dfirst = recs.front().dual_energy;
    const double dlast = recs.back().dual_energy;
    const double span = recs.back().t - recs.front().t;
    if (dfirst > 0.0 && dlast > 0.0 && span > 0.0) a.fitted_rate = 0.5 * std::log(dlast / dfirst) / span;
    return a;
}

nlohmann::json DualEnergyAudit::to_json() const {
    return {{"max_excess", std::isfinite(max_excess) ? nlohmann::json(max_excess) : nlohmann::json("inf")},
            {"violations", violations},
            {"ok", ok},
            {"fitted_rate", fitted_rate}};
}

}  // namespace rtspectra
