#include "rtspectra/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <string>

#include "rtspectra/errors.hpp"
#include "rtspectra/json_io.hpp"
#include "rtspectra/run_io.hpp"

namespace rtspectra {

namespace {

/// Runs fn(i) for i in [0, n) with at most `workers` in flight; results keep
/// index order, the first exception is rethrown after all tasks finished.
template <class T, class F>
std::vector<T> map_parallel(std::size_t n, int workers, F fn) {
    std::vector<T> out(n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::exception_ptr first;
    for (std::size_t lo = 0; lo < n; lo += static_cast<std::size_t>(workers)) {
        const std::size_t hi = std::min(n, lo + static_cast<std::size_t>(workers));
        std::vector<std::future<T>> fut;
        for (std::size_t i = lo; i < hi; ++i) fut.push_back(std::async(std::launch::async, fn, i));
        for (std::size_t i = lo; i < hi; ++i) {
            try {
                out[i] = fut[i - lo].get();
            } catch (...) {
                if (!first) first = std::current_exception();
            }
        }
    }
    if (first) std::rethrow_exception(first);
    return out;
}

GrowthRateResult growth_for(const ExperimentSetup& setup, const GrowthRateResult* given) {
    if (given) return *given;
    GrowthOptions o = setup.growth;
    o.cross_check = false;
    return solve_growth_rate(SpectralModel(setup.grid, setup.profile, setup.params), o);
}

double state_norm(const SimState& s) { return std::hypot(s.rho_pert.l2_norm(), s.velocity.l2_norm()); }

/// Time where log(norm) crosses log(level) between two records.
double crossing(double t0, double n0, double t1, double n1, double level) {
    if (!(n0 > 0.0) || !(n1 > n0)) return t1;
    const double f = std::log(level / n0) / std::log(n1 / n0);
    return t0 + std::clamp(f, 0.0, 1.0) * (t1 - t0);
}

nlohmann::json optional_json(const std::optional<double>& x) { return x ? nlohmann::json(*x) : nlohmann::json(nullptr); }

std::string amp_tag(double a) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", a);
    return buf;
}

void write_trace(const std::filesystem::path& dir, const std::string& name, const MonitorTrace& tr) {
    std::filesystem::create_directories(dir / "traces");
    tr.write_csv(dir / "traces" / (name + ".csv"));
}

}  // namespace

// ---------------------------------------------------------------------------
// escape time

void EscapeTimeConfig::validate() const {
    if (deltas.empty()) throw PreconditionError("escape_time: deltas must not be empty");
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (!(deltas[i] > 0.0)) throw PreconditionError("escape_time: deltas must be positive");
        if (i > 0 && !(deltas[i] < deltas[i - 1]))
            throw PreconditionError("escape_time: deltas must be strictly decreasing");
    }
    if (!(epsilon0 > deltas.front())) throw PreconditionError("escape_time: epsilon0 must exceed every delta");
    if (!(dt_fraction > 0.0) || !(budget_factor > 0.0))
        throw PreconditionError("escape_time: dt_fraction and budget_factor must be positive");
}

nlohmann::json EscapeTimeConfig::to_json() const {
    return {{"deltas", deltas},
            {"epsilon0", epsilon0},
            {"dt_fraction", dt_fraction},
            {"budget_factor", budget_factor},
            {"slope_tolerance", slope_tolerance},
            {"linearity_tolerance", linearity_tolerance},
            {"density_scheme", to_string(nonlinear.scheme)}};
}

double ModeNorms::m0() const { return std::min({rho, vertical, horizontal}); }

ModeNorms mode_norms(const EigenSolution& sol) {
    const SimState s = eigenmode_state(sol, 1.0, EvolutionMode::Linear);
    const auto& g = s.velocity.grid();
    ModeNorms m;
    m.rho = s.rho_pert.l2_norm();
    double hsq = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
        const double c = s.velocity.component_l2_norm(a);
        if (a == g.gravity_axis()) m.vertical = c;
        else hsq += c * c;
    }
    m.horizontal = std::sqrt(hsq);
    return m;
}

nlohmann::json EscapeRun::to_json() const {
    return {{"delta", delta},
            {"escape_time", optional_json(escape_time)},
            {"t_rho", optional_json(t_rho)},
            {"t_vertical", optional_json(t_vertical)},
            {"t_horizontal", optional_json(t_horizontal)},
            {"crossed", crossed()},
            {"budget", budget},
            {"steps", steps},
            {"dt", dt},
            {"linearity_deviation", linearity_deviation}};
}

EscapeRun escape_run(const ExperimentSetup& setup, const EigenSolution& mode, double lambda, double delta,
                     const EscapeTimeConfig& cfg) {
    if (!(lambda > 0.0)) throw PreconditionError("escape_run: lambda must be positive");
    if (!(delta > 0.0)) throw PreconditionError("escape_run: delta must be positive");
    const ModeNorms mn = mode_norms(mode);
    const double eps = mn.m0() * cfg.epsilon0;
    EscapeRun out;
    out.delta = delta;
    out.budget = std::max(0.0, cfg.budget_factor / lambda * std::log(2.0 * cfg.epsilon0 / delta));
    out.dt = cfg.dt_fraction / lambda;

    SimState s = eigenmode_state(mode, delta, EvolutionMode::Nonlinear);
    const double n_mode = state_norm(eigenmode_state(mode, 1.0, EvolutionMode::Linear));

    Simulation sim(setup.grid, setup.profile, setup.params, EvolutionMode::Nonlinear, cfg.nonlinear);
    RunOptions o;
    o.t_end = out.budget;
    o.dt.fixed = out.dt;
    const MonitorRecord* prev = nullptr;
    MonitorRecord last;
    auto update = [&](std::optional<double>& t, double n0, double n1, double t0, double t1) {
        if (t || n1 < eps) return;
        t = prev ? crossing(t0, n0, t1, n1, eps) : t1;
    };
    o.stop = [&](const MonitorRecord& r) {
        const double t0 = prev ? last.t : r.t;
        update(out.t_rho, prev ? last.rho_l2 : 0.0, r.rho_l2, t0, r.t);
        update(out.t_vertical, prev ? last.u3_l2 : 0.0, r.u3_l2, t0, r.t);
        update(out.t_horizontal, prev ? last.uh_l2 : 0.0, r.uh_l2, t0, r.t);
        const double n = r.norm();
        if (n <= cfg.epsilon0 / 4.0) {
            const double ref = delta * n_mode * std::exp(lambda * r.t);
            out.linearity_deviation = std::max(out.linearity_deviation, std::abs(n / ref - 1.0));
        }
        last = r;
        prev = &last;
        return out.t_rho && out.t_vertical && out.t_horizontal;
    };
    try {
        if (out.budget > 0.0) {
            out.trace = sim.run(s, o);
        } else {
            // no time to evolve: only the initial state is checked
            RunOptions z = o;
            z.max_steps = 0;
            z.t_end = 1.0;
            out.trace = sim.run(s, z);
        }
    } catch (const SolverError& e) {
        throw SolverError("escape_time: delta = " + std::to_string(delta) + ": " + e.what(), e.last_residual());
    }
    out.steps = s.step;
    if (out.t_rho && out.t_vertical && out.t_horizontal)
        out.escape_time = std::max({*out.t_rho, *out.t_vertical, *out.t_horizontal});
    return out;
}

bool EscapeTimeResult::ok() const {
    return all_crossed && monotone && linearity_ok && slope_error <= config.slope_tolerance;
}

nlohmann::json EscapeTimeResult::to_json() const {
    nlohmann::json runs_j = nlohmann::json::array();
    for (const auto& r : runs) runs_j.push_back(r.to_json());
    return {{"experiment", "escape_time"},
            {"config", config.to_json()},
            {"lambda_reference", lambda_reference},
            {"mode_norms", {{"rho", norms.rho}, {"vertical", norms.vertical}, {"horizontal", norms.horizontal},
                            {"m0", norms.m0()}}},
            {"threshold", threshold},
            {"runs", runs_j},
            {"slope", finite_or_null(slope)},
            {"intercept", finite_or_null(intercept)},
            {"lambda_implied", finite_or_null(lambda_implied)},
            {"slope_error", finite_or_null(slope_error)},
            {"halving_increments", halving_increments},
            {"all_crossed", all_crossed},
            {"monotone", monotone},
            {"linearity_ok", linearity_ok},
            {"ok", ok()}};
}

void EscapeTimeResult::write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    write_json_atomic(dir / "result.json", to_json());
    std::vector<std::vector<double>> rows;
    for (const auto& r : runs) {
        const double nan = std::nan("");
        rows.push_back({std::log(1.0 / r.delta), r.delta, r.escape_time.value_or(nan), r.t_rho.value_or(nan),
                        r.t_vertical.value_or(nan), r.t_horizontal.value_or(nan)});
        write_trace(dir, "delta_" + amp_tag(r.delta), r.trace);
    }
    write_dat(dir / "escape_time.dat", {"ln_inv_delta", "delta", "T", "T_rho", "T_vertical", "T_horizontal"}, rows);
    std::vector<std::vector<double>> fit;
    for (const auto& r : runs) {
        const double x = std::log(1.0 / r.delta);
        fit.push_back({x, intercept + slope * x, x / lambda_reference});
    }
    write_dat(dir / "escape_fit.dat", {"ln_inv_delta", "T_fit", "T_reference_slope"}, fit);
}

EscapeTimeResult run_escape_time(const ExperimentSetup& setup, const EscapeTimeConfig& cfg,
                                 const GrowthRateResult* growth) {
    cfg.validate();
    const SpectralModel model(setup.grid, setup.profile, setup.params);
    if (model.stratification() != Stratification::UniformlyUnstable)
        throw PreconditionError("escape_time: profile must be uniformly unstable (rho' > 0 everywhere)");
    const GrowthRateResult gr = growth_for(setup, growth);
    if (!gr.unstable()) throw PreconditionError("escape_time: no positive growth rate");

    EscapeTimeResult res;
    res.config = cfg;
    res.lambda_reference = *gr.lambda;
    res.norms = mode_norms(gr.eigen);
    res.threshold = res.norms.m0() * cfg.epsilon0;
    res.runs = map_parallel<EscapeRun>(cfg.deltas.size(), setup.workers, [&](std::size_t i) {
        return escape_run(setup, gr.eigen, res.lambda_reference, cfg.deltas[i], cfg);
    });

    res.all_crossed = std::all_of(res.runs.begin(), res.runs.end(), [](const EscapeRun& r) { return r.crossed(); });
    res.monotone = res.all_crossed;
    for (std::size_t i = 1; res.monotone && i < res.runs.size(); ++i)
        res.monotone = *res.runs[i].escape_time > *res.runs[i - 1].escape_time;
    res.linearity_ok = res.runs.back().linearity_deviation <= cfg.linearity_tolerance;

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& r : res.runs) {
        if (!r.crossed()) continue;
        const double x = std::log(1.0 / r.delta);
        sx += x;
        sy += *r.escape_time;
        sxx += x * x;
        sxy += x * *r.escape_time;
        ++n;
    }
    res.slope = res.intercept = res.lambda_implied = res.slope_error = std::nan("");
    if (n >= 2) {
        const double den = n * sxx - sx * sx;
        res.slope = (n * sxy - sx * sy) / den;
        res.intercept = (sy - res.slope * sx) / n;
        res.lambda_implied = 1.0 / res.slope;
        res.slope_error = std::abs(res.slope * res.lambda_reference - 1.0);
    }
    for (std::size_t i = 1; i < res.runs.size(); ++i) {
        const auto& a = res.runs[i - 1];
        const auto& b = res.runs[i];
        if (a.crossed() && b.crossed())
            res.halving_increments.push_back(res.lambda_reference * (*b.escape_time - *a.escape_time) /
                                             std::log(a.delta / b.delta));
    }
    return res;
}

// ---------------------------------------------------------------------------
// sharp growth

nlohmann::json SharpGrowthConfig::to_json() const {
    return {{"n_random", n_random},          {"seed", seed},
            {"amplitude", amplitude},        {"dt_fraction", dt_fraction},
            {"t_end", t_end},                {"fit_start", fit_start},
            {"rate_tolerance", rate_tolerance}, {"constant_tolerance", constant_tolerance}};
}

nlohmann::json GrowthRun::to_json() const {
    return {{"label", label},
            {"rate", rate},
            {"constant", constant},
            {"constant_half_dt", constant_half_dt},
            {"dual_audit", dual ? dual->to_json() : nlohmann::json(nullptr)}};
}

bool SharpGrowthResult::eigen_ok() const { return std::abs(eigen.rate / lambda - 1.0) <= config.rate_tolerance; }
bool SharpGrowthResult::sharpness_ok() const { return max_random_rate <= (1.0 + config.rate_tolerance) * lambda; }
bool SharpGrowthResult::constant_ok() const {
    return std::isfinite(c_hat) && c_hat_change < config.constant_tolerance;
}
bool SharpGrowthResult::dual_ok() const {
    if (eigen.dual && !eigen.dual->ok) return false;
    return std::all_of(random.begin(), random.end(), [](const GrowthRun& r) { return !r.dual || r.dual->ok; });
}
bool SharpGrowthResult::ok() const { return eigen_ok() && sharpness_ok() && constant_ok() && dual_ok(); }

nlohmann::json SharpGrowthResult::to_json() const {
    nlohmann::json rr = nlohmann::json::array();
    for (const auto& r : random) rr.push_back(r.to_json());
    return {{"experiment", "sharp_growth"},
            {"config", config.to_json()},
            {"lambda", lambda},
            {"eigenmode", eigen.to_json()},
            {"random", rr},
            {"max_random_rate", max_random_rate},
            {"max_random_rate_over_lambda", max_random_rate / lambda},
            {"c_hat", c_hat},
            {"c_hat_half_dt", c_hat_half_dt},
            {"c_hat_change", c_hat_change},
            {"eigen_ok", eigen_ok()},
            {"sharpness_ok", sharpness_ok()},
            {"constant_ok", constant_ok()},
            {"dual_ok", dual_ok()},
            {"ok", ok()}};
}

void SharpGrowthResult::write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    write_json_atomic(dir / "result.json", to_json());
    std::vector<std::vector<double>> rates;
    rates.push_back({0.0, eigen.rate / lambda, eigen.constant});
    for (std::size_t i = 0; i < random.size(); ++i)
        rates.push_back({static_cast<double>(i + 1), random[i].rate / lambda, random[i].constant});
    write_dat(dir / "growth_rates.dat", {"run", "rate_over_lambda", "constant"}, rates);
    std::vector<std::vector<double>> curve;
    const double n0 = eigen.trace.records.front().norm();
    for (const auto& r : eigen.trace.records)
        curve.push_back({r.t, std::log(r.norm() / n0), lambda * r.t});
    write_dat(dir / "eigenmode_growth.dat", {"t", "log_norm_ratio", "lambda_t"}, curve);
    write_trace(dir, eigen.label, eigen.trace);
    for (const auto& r : random) write_trace(dir, r.label, r.trace);
}

SharpGrowthResult run_sharp_growth(const ExperimentSetup& setup, const SharpGrowthConfig& cfg,
                                   const GrowthRateResult* growth) {
    if (cfg.n_random < 0) throw PreconditionError("sharp_growth: n_random must be nonnegative");
    const GrowthRateResult gr = growth_for(setup, growth);
    if (!gr.unstable()) throw PreconditionError("sharp_growth: profile has no positive growth rate");
    const double L = *gr.lambda;
    const bool dual = SpectralModel(setup.grid, setup.profile, setup.params).stratification() ==
                      Stratification::UniformlyUnstable;

    auto initial = [&](std::size_t i) {
        return i == 0 ? eigenmode_state(gr.eigen, cfg.amplitude, EvolutionMode::Linear)
                      : random_state(setup.grid, cfg.seed + i - 1, cfg.amplitude, EvolutionMode::Linear);
    };
    auto constant_of = [&](const MonitorTrace& tr) {
        const double n0 = tr.records.front().norm();
        double c = 0.0;
        for (const auto& r : tr.records) c = std::max(c, r.norm() / (std::exp(L * r.t) * n0));
        return c;
    };
    auto one = [&](std::size_t i) {
        GrowthRun run;
        run.label = i == 0 ? "eigenmode" : "random_" + std::to_string(cfg.seed + i - 1);
        Simulation sim(setup.grid, setup.profile, setup.params, EvolutionMode::Linear);
        RunOptions o;
        o.t_end = cfg.t_end / L;
        o.dt.fixed = cfg.dt_fraction / L;
        SimState s = initial(i);
        run.trace = sim.run(s, o);
        run.rate = measure_growth_rate(run.trace, cfg.fit_start / L, cfg.t_end / L);
        run.constant = constant_of(run.trace);
        if (dual) run.dual = dual_energy_audit(run.trace, L);
        SimState h = initial(i);
        o.dt.fixed = 0.5 * cfg.dt_fraction / L;
        run.constant_half_dt = constant_of(sim.run(h, o));
        return run;
    };
    std::vector<GrowthRun> all =
        map_parallel<GrowthRun>(static_cast<std::size_t>(cfg.n_random) + 1, setup.workers, one);

    SharpGrowthResult res;
    res.config = cfg;
    res.lambda = L;
    res.eigen = std::move(all.front());
    res.random.assign(std::make_move_iterator(all.begin() + 1), std::make_move_iterator(all.end()));
    res.max_random_rate = -INFINITY;
    res.c_hat = res.eigen.constant;
    res.c_hat_half_dt = res.eigen.constant_half_dt;
    for (const auto& r : res.random) {
        res.max_random_rate = std::max(res.max_random_rate, r.rate);
        res.c_hat = std::max(res.c_hat, r.constant);
        res.c_hat_half_dt = std::max(res.c_hat_half_dt, r.constant_half_dt);
    }
    if (res.random.empty()) res.max_random_rate = 0.0;
    res.c_hat_change = std::abs(res.c_hat_half_dt - res.c_hat) / res.c_hat;
    return res;
}

// ---------------------------------------------------------------------------
// stability

bool constant_gradient(const ProfileSamples& s) {
    const double lo = s.drho.min();
    const double hi = s.drho.max();
    return hi - lo <= 1e-10 * std::max(std::abs(lo), std::abs(hi));
}

nlohmann::json StabilityConfig::to_json() const {
    return {{"amplitudes", amplitudes},
            {"seed", seed},
            {"dt", dt},
            {"t_max", t_max},
            {"density_bound", density_bound ? nlohmann::json(*density_bound) : nlohmann::json(nullptr)},
            {"nonlinear", nonlinear},
            {"density_scheme", to_string(nonlinear_options.scheme)}};
}

std::optional<bool> StableRun::passed() const {
    if (!hypothesis_met) return std::nullopt;
    return report.ok() && (report.zero_initial || report.c_estimate <= 1.01);
}

nlohmann::json StableRun::to_json() const {
    const auto p = passed();
    nlohmann::json j = {{"mode", to_string(mode)},
                        {"amplitude", amplitude},
                        {"initial_lyapunov", initial_lyapunov},
                        {"report", report.to_json()},
                        {"hypothesis_met", hypothesis_met},
                        {"initial_density_min", density_min},
                        {"initial_density_max", density_max},
                        {"t_final", t_final},
                        {"steps", steps},
                        {"passed", p ? nlohmann::json(*p) : nlohmann::json(nullptr)}};
    if (!hypothesis_met) j["label"] = "beyond constant-gradient hypothesis";
    return j;
}

bool StabilityResult::ok() const {
    for (const auto& r : runs)
        if (auto p = r.passed(); p && !*p) return false;
    return std::all_of(amplitude_scaling_errors.begin(), amplitude_scaling_errors.end(),
                       [](double e) { return std::abs(e) <= 1e-12; });
}

nlohmann::json StabilityResult::to_json() const {
    nlohmann::json rr = nlohmann::json::array();
    for (const auto& r : runs) rr.push_back(r.to_json());
    return {{"experiment", "stability_suite"},
            {"config", config.to_json()},
            {"constant_gradient", constant_gradient},
            {"density_bound", density_bound},
            {"runs", rr},
            {"amplitude_scaling_errors", amplitude_scaling_errors},
            {"ok", ok()}};
}

void StabilityResult::write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    write_json_atomic(dir / "result.json", to_json());
    for (const auto& r : runs) {
        const std::string name = to_string(r.mode) + "_" + amp_tag(r.amplitude);
        write_trace(dir, name, r.trace);
        std::vector<std::vector<double>> rows;
        const double h0 = r.trace.records.front().h1;
        const double l0 = r.trace.records.front().lyapunov;
        for (const auto& m : r.trace.records)
            rows.push_back({m.t, h0 > 0.0 ? m.h1 / h0 : 0.0, l0 > 0.0 ? m.lyapunov / l0 : 0.0,
                            m.dissipation_integral});
        write_dat(dir / ("decay_" + name + ".dat"), {"t", "h1_ratio", "lyapunov_ratio", "dissipation_integral"},
                  rows);
    }
}

StabilityResult run_stability_suite(const ExperimentSetup& setup, const StabilityConfig& cfg) {
    if (cfg.amplitudes.empty()) throw PreconditionError("stability_suite: amplitudes must not be empty");
    for (double a : cfg.amplitudes)
        if (!(a >= 0.0)) throw PreconditionError("stability_suite: amplitudes must be nonnegative");
    const ProfileSamples smp = ProfileSamples::make(setup.grid, setup.profile);
    if (!(smp.drho.max() < 0.0)) throw PreconditionError("stability_suite: profile must be stable (sup rho' < 0)");

    StabilityResult res;
    res.config = cfg;
    res.constant_gradient = constant_gradient(smp);
    res.density_bound = cfg.density_bound.value_or(2.0 * smp.rho.max());

    struct Job {
        EvolutionMode mode;
        double amplitude;
    };
    std::vector<Job> jobs;
    for (double a : cfg.amplitudes) jobs.push_back({EvolutionMode::Linear, a});
    if (cfg.nonlinear)
        for (double a : cfg.amplitudes) jobs.push_back({EvolutionMode::Nonlinear, a});

    // the hypothesis band is checked for every nonlinear run before anything starts
    for (const Job& j : jobs) {
        if (j.mode != EvolutionMode::Nonlinear) continue;
        const SimState s = random_state(setup.grid, cfg.seed, j.amplitude, j.mode);
        const ScalarField total = smp.rho + s.rho_pert;
        if (!(total.min() > 0.0) || total.max() > res.density_bound)
            throw PreconditionError("stability_suite: initial total density [" + std::to_string(total.min()) + ", " +
                                    std::to_string(total.max()) + "] leaves (0, K], K = " +
                                    std::to_string(res.density_bound) + " at amplitude " + amp_tag(j.amplitude));
    }

    res.runs = map_parallel<StableRun>(jobs.size(), setup.workers, [&](std::size_t i) {
        const Job& j = jobs[i];
        StableRun run;
        run.mode = j.mode;
        run.amplitude = j.amplitude;
        run.hypothesis_met = j.mode == EvolutionMode::Linear || res.constant_gradient;
        SimState s = random_state(setup.grid, cfg.seed, j.amplitude, j.mode);
        const ScalarField total = smp.rho + s.rho_pert;
        run.density_min = total.min();
        run.density_max = total.max();
        Simulation sim(setup.grid, setup.profile, setup.params, j.mode, cfg.nonlinear_options);
        RunOptions o;
        o.t_end = cfg.t_max;
        o.dt.fixed = cfg.dt;
        double h0 = -1.0;
        o.stop = [&](const MonitorRecord& r) {
            if (h0 < 0.0) h0 = r.h1;
            return r.h1 < 0.01 * h0;
        };
        run.trace = sim.run(s, o);
        run.initial_lyapunov = run.trace.records.front().lyapunov;
        run.report = stable_decay_report(run.trace, setup.params);
        run.t_final = s.t;
        run.steps = s.step;
        return run;
    });

    for (std::size_t i = 1; i < cfg.amplitudes.size(); ++i) {
        const double a0 = cfg.amplitudes[i - 1];
        const double a1 = cfg.amplitudes[i];
        const double l0 = res.runs[i - 1].initial_lyapunov;
        const double l1 = res.runs[i].initial_lyapunov;
        if (a0 > 0.0 && l0 > 0.0) res.amplitude_scaling_errors.push_back(l1 / l0 / ((a1 / a0) * (a1 / a0)) - 1.0);
    }
    return res;
}

}  // namespace rtspectra
