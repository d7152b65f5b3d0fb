#include "rtspectra/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <functional>

#include "rtspectra/errors.hpp"
#include "rtspectra/json_io.hpp"
#include "rtspectra/run_io.hpp"

#ifndef RTSPECTRA_VERSION
#define RTSPECTRA_VERSION "0.0.0"
#endif

namespace rtspectra {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Named, timed stages; the record survives a stage that throws.
class Stages {
public:
    template <class F>
    auto operator()(const std::string& name, F&& fn) {
        const auto t0 = Clock::now();
        log_.push_back({{"name", name}, {"seconds", nullptr}, {"completed", false}});
        const std::size_t slot = log_.size() - 1;
        auto finish = [&] { log_[slot]["seconds"] = std::chrono::duration<double>(Clock::now() - t0).count(); };
        try {
            if constexpr (std::is_void_v<std::invoke_result_t<F>>) {
                fn();
                finish();
                log_[slot]["completed"] = true;
            } else {
                auto r = fn();
                finish();
                log_[slot]["completed"] = true;
                return r;
            }
        } catch (...) {
            finish();
            throw;
        }
    }
    const json& log() const { return log_; }

private:
    json log_ = json::array();
};

struct Context {
    const RunConfig& cfg;
    fs::path dir;
    Stages stages;
    json summary = json::object();
    bool certificates_ok = true;

    void certify(const std::string& name, bool ok) {
        summary["certificates"][name] = ok;
        certificates_ok = certificates_ok && ok;
    }
};

GrowthOptions growth_options(const RunConfig& c) {
    GrowthOptions o;
    o.eigen.tol = c.tolerances.eigen;
    o.eigen.seed = c.seed;
    o.eigen.projection_tol = c.tolerances.projection;
    o.fixed_point_tol = c.tolerances.fixed_point;
    return o;
}

NonlinearOptions nonlinear_options(const RunConfig& c, DensityScheme scheme) {
    NonlinearOptions o;
    o.scheme = scheme;
    o.projection_tol = c.tolerances.evolution_projection;
    return o;
}

/// All certificates of one growth-rate solve; a verdict of no instability
/// passes unless the profile is classified unstable.
json growth_certificates(const GrowthRateResult& r, const SpectralModel& model, const RunConfig& c, bool& ok) {
    json j = json::object();
    if (!r.unstable()) {
        j["verdict_consistent"] = model.stratification() == Stratification::Stable ||
                                  model.stratification() == Stratification::Indeterminate;
        ok = j["verdict_consistent"].get<bool>();
        return j;
    }
    const double l = *r.lambda;
    j["fixed_point"] = std::abs(r.fixed_point_defect()) <= c.tolerances.fixed_point * std::max(1.0, l * l);
    j["pde_residual"] = r.pde_residual <= 1e-6;
    j["v3_nonzero"] = r.nondegeneracy.v3_nonzero;
    j["horizontal_nonzero"] = r.nondegeneracy.horizontal_nonzero;
    if (r.lambda_vs_lambdaN_gap) j["lambda_N_agreement"] = *r.lambda_vs_lambdaN_gap <= 1e-6 * l;
    ok = true;
    for (const auto& [k, v] : j.items()) ok = ok && v.get<bool>();
    return j;
}

struct GrowthStage {
    GrowthRateResult result;
    json json_out;
    bool ok = false;
};

GrowthStage growth_stage(const RunConfig& c, const StaggeredGrid& grid, const DensityProfile& profile,
                         const fs::path& dir) {
    const SpectralModel model(grid, profile, c.params, c.tolerances.projection);
    GrowthStage g;
    g.result = solve_growth_rate(model, growth_options(c));
    g.json_out = g.result.to_json(model);
    g.json_out["stratification"] = to_string(model.stratification());
    g.json_out["certificates"] = growth_certificates(g.result, model, c, g.ok);
    g.json_out["ok"] = g.ok;
    write_json_atomic(dir / "result.json", g.json_out);
    g.result.save_fields(dir / "fields");
    return g;
}

// ---------------------------------------------------------------------------

void cmd_growth_rate(Context& ctx) {
    const auto& c = ctx.cfg;
    const GrowthStage g = ctx.stages("growth_rate", [&] {
        return growth_stage(c, c.grid.make(), DensityProfile::parse(c.profile), ctx.dir);
    });
    ctx.summary["lambda"] = g.json_out["lambda"];
    ctx.summary["verdict"] = g.result.unstable() ? "unstable" : "no positive growth rate";
    ctx.certify("growth_rate", g.ok);
}

void cmd_alpha_sweep(Context& ctx) {
    const auto& c = ctx.cfg;
    const StaggeredGrid grid = c.grid.make();
    const DensityProfile profile = DensityProfile::parse(c.profile);
    const SpectralModel model(grid, profile, c.params, c.tolerances.projection);
    const double ratio = model.samples().ratio_max;
    const double s_max = c.alpha_sweep.s_max.value_or(ratio > 0.0 ? std::sqrt(c.params.g * ratio) : 1.0);
    if (!(s_max > c.alpha_sweep.s_min)) throw ConfigError("alpha_sweep.s_max", "must exceed s_min");
    std::vector<double> s(static_cast<std::size_t>(c.alpha_sweep.count));
    for (std::size_t i = 0; i < s.size(); ++i)
        s[i] = c.alpha_sweep.s_min + (s_max - c.alpha_sweep.s_min) * static_cast<double>(i) / (s.size() - 1);
    GrowthOptions go = growth_options(c);
    const AlphaCurve curve = ctx.stages(
        "alpha_sweep", [&] { return sample_alpha_curve(model, s, go.eigen, c.resolved_workers()); });
    // eigenvalue accuracy bounds the achievable slack of every check
    const double tol = 10.0 * c.tolerances.eigen * std::max(1.0, curve.upper_bound);
    json j = curve.to_json();
    j["s_max"] = s_max;
    j["check_tolerance"] = tol;
    j["certificates"] = {{"monotone", curve.monotone(tol)},
                         {"lower_bound", curve.lower_bound_holds(tol)},
                         {"upper_bound", curve.upper_bound_holds(tol)}};
    j["stratification"] = to_string(model.stratification());
    ctx.stages("write", [&] {
        curve.write_csv(ctx.dir / "alpha_curve.csv");
        std::vector<std::vector<double>> rows;
        for (const auto& a : curve.samples)
            rows.push_back({a.s, a.alpha, curve.has_certificate ? curve.c3 - curve.c4 * a.s : std::nan(""),
                            curve.upper_bound});
        write_dat(ctx.dir / "alpha_curve.dat", {"s", "alpha", "c3_minus_c4s", "upper_bound"}, rows);
        write_json_atomic(ctx.dir / "result.json", j);
    });
    for (const auto& [k, v] : j["certificates"].items()) ctx.certify("alpha_" + k, v.get<bool>());
    ctx.summary["samples"] = curve.samples.size();
}

void cmd_evolve(Context& ctx, EvolutionMode mode) {
    const auto& c = ctx.cfg;
    const StaggeredGrid grid = c.grid.make();
    const DensityProfile profile = DensityProfile::parse(c.profile);
    profile.validate_on(grid);
    const Stratification strat = profile.classify(grid.length(grid.gravity_axis()));
    const bool unstable_profile = strat == Stratification::UniformlyUnstable || strat == Stratification::RtUnstable;

    std::optional<GrowthStage> growth;
    if (unstable_profile)
        growth = ctx.stages("growth_rate", [&] { return growth_stage(c, grid, profile, ctx.dir / "growth"); });
    std::optional<double> lambda;
    if (growth && growth->result.lambda) lambda = growth->result.lambda.value();

    SimState s = SimState::zero(grid, mode);
    if (c.evolve.init == "random") {
        s = random_state(grid, c.seed, c.evolve.amplitude, mode);
    } else if (c.evolve.init == "eigenmode") {
        if (!lambda) throw PreconditionError("evolve.init=eigenmode needs a profile with a positive growth rate");
        s = eigenmode_state(growth->result.eigen, c.evolve.amplitude, mode);
    }

    const DensityScheme scheme = parse_scheme(c.evolve.scheme);
    Simulation sim(grid, profile, c.params, mode, nonlinear_options(c, scheme));
    RunOptions ro;
    ro.t_end = c.evolve.t_end;
    ro.dt.fixed = c.evolve.dt;
    ro.dt.cfl = c.evolve.cfl;
    ro.dt.viscous_factor = c.evolve.viscous_factor;
    ro.checkpoint_every = c.evolve.checkpoint_every;
    ro.checkpoint_dir = ctx.dir / "checkpoints";
    const MonitorTrace trace = ctx.stages("evolve", [&] { return sim.run(s, ro); });

    json j;
    j["mode"] = to_string(mode);
    j["init"] = c.evolve.init;
    j["scheme"] = to_string(scheme);
    j["stratification"] = to_string(strat);
    j["steps"] = s.step;
    j["t_final"] = s.t;
    j["dt_policy"] = ro.dt.to_json();
    j["norm_initial"] = trace.records.front().norm();
    j["norm_final"] = trace.back().norm();
    j["lambda"] = finite_or_null(lambda.value_or(std::nan("")));
    json certs = json::object();

    if (lambda && trace.size() >= 10 && s.t > 0.0) {
        try {
            const double rate = measure_growth_rate(trace, s.t / 3.0, s.t);
            j["fitted_rate"] = rate;
            j["fitted_rate_over_lambda"] = rate / *lambda;
            if (mode == EvolutionMode::Linear && c.evolve.init != "zero") {
                certs["rate_at_most_lambda"] = rate <= 1.02 * *lambda;
                if (c.evolve.init == "eigenmode") certs["eigenmode_rate"] = std::abs(rate / *lambda - 1.0) <= 0.02;
            }
        } catch (const PreconditionError&) {
            j["fitted_rate"] = nullptr;  // too few records in the window
        }
        if (mode == EvolutionMode::Linear && strat == Stratification::UniformlyUnstable) {
            const DualEnergyAudit audit = dual_energy_audit(trace, *lambda);
            j["dual_audit"] = audit.to_json();
            certs["dual_energy"] = audit.ok;
        }
    }
    if (strat == Stratification::Stable) {
        const StableDecayReport rep = stable_decay_report(trace, c.params);
        j["decay_report"] = rep.to_json();
        const bool in_hypothesis =
            mode == EvolutionMode::Linear || constant_gradient(ProfileSamples::make(grid, profile));
        j["hypothesis_met"] = in_hypothesis;
        if (in_hypothesis && !rep.zero_initial) {
            certs["lyapunov_identity"] = rep.identity_ok;
            certs["lyapunov_bound"] = rep.c_estimate <= 1.01;
        }
    }
    if (mode == EvolutionMode::Nonlinear) {
        double lo = INFINITY, hi = -INFINITY;
        for (const auto& r : trace.records) lo = std::min(lo, r.rho_min), hi = std::max(hi, r.rho_max);
        j["density_range"] = {finite_or_null(lo), finite_or_null(hi)};
    }
    j["certificates"] = certs;
    ctx.stages("write", [&] {
        trace.write_csv(ctx.dir / "trace.csv");
        write_checkpoint(ctx.dir / "final", s);
        write_json_atomic(ctx.dir / "result.json", j);
    });
    for (const auto& [k, v] : certs.items()) ctx.certify(k, v.get<bool>());
    ctx.summary["t_final"] = s.t;
    ctx.summary["steps"] = s.step;
    if (j.contains("fitted_rate")) ctx.summary["fitted_rate"] = j["fitted_rate"];
}

ExperimentSetup setup_for(const RunConfig& c, const std::string& grid, const std::string& profile) {
    ExperimentSetup s{GridSpec::parse(grid).make(), DensityProfile::parse(profile), c.params, growth_options(c),
                      c.resolved_workers()};
    return s;
}

ExperimentSetup setup_for(const RunConfig& c) {
    return {c.grid.make(), DensityProfile::parse(c.profile), c.params, growth_options(c), c.resolved_workers()};
}

void cmd_escape_time(Context& ctx) {
    EscapeTimeConfig ec = ctx.cfg.escape_time;
    ec.nonlinear.projection_tol = ctx.cfg.tolerances.evolution_projection;
    const EscapeTimeResult r = ctx.stages("escape_time", [&] { return run_escape_time(setup_for(ctx.cfg), ec); });
    ctx.stages("write", [&] { r.write(ctx.dir); });
    ctx.summary["slope"] = r.slope;
    ctx.summary["lambda_implied"] = r.lambda_implied;
    ctx.summary["lambda"] = r.lambda_reference;
    ctx.certify("escape_time", r.ok());
}

SharpGrowthResult sharp_growth(Context& ctx, const ExperimentSetup& setup, const fs::path& dir,
                               const GrowthRateResult* growth) {
    const SharpGrowthResult r =
        ctx.stages("sharp_growth", [&] { return run_sharp_growth(setup, ctx.cfg.sharp_growth, growth); });
    ctx.stages("write_sharp_growth", [&] { r.write(dir); });
    ctx.certify("sharp_growth", r.ok());
    return r;
}

StabilityResult stability(Context& ctx, const ExperimentSetup& setup, const fs::path& dir) {
    StabilityConfig sc = ctx.cfg.stability;
    sc.nonlinear_options.projection_tol = ctx.cfg.tolerances.evolution_projection;
    const StabilityResult r = ctx.stages("stability_suite", [&] { return run_stability_suite(setup, sc); });
    ctx.stages("write_stability", [&] { r.write(dir); });
    ctx.certify("stability_suite", r.ok());
    return r;
}

void cmd_verify_all(Context& ctx) {
    const auto& c = ctx.cfg;
    const auto& v = c.verify_all;
    json growth = json::object();
    std::optional<GrowthRateResult> first_unstable;
    for (const auto& g : v.grids) {
        const StaggeredGrid grid = GridSpec::parse(g).make();
        for (const auto& [tag, spec] : {std::pair{"unstable", v.unstable_profile}, std::pair{"stable", v.stable_profile}}) {
            const std::string name = std::string("growth_") + tag + "_" + g;
            const GrowthStage st =
                ctx.stages(name, [&] { return growth_stage(c, grid, DensityProfile::parse(spec), ctx.dir / name); });
            growth[name] = {{"lambda", st.json_out["lambda"]},
                            {"lambda_N", st.json_out["lambda_N"]},
                            {"ok", st.ok}};
            ctx.certify(name, st.ok);
            if (std::string(tag) == "unstable" && !first_unstable) first_unstable = st.result;
            if (std::string(tag) == "stable" && st.result.unstable()) ctx.certify(name + "_verdict", false);
        }
    }
    ctx.summary["growth"] = growth;

    const SharpGrowthResult sg = sharp_growth(ctx, setup_for(c, v.grids.front(), v.unstable_profile),
                                              ctx.dir / "sharp_growth", first_unstable ? &*first_unstable : nullptr);
    ctx.summary["sharp_growth"] = {{"lambda", sg.lambda},
                                   {"eigen_rate", sg.eigen.rate},
                                   {"max_random_rate", sg.max_random_rate},
                                   {"ok", sg.ok()}};
    const StabilityResult st = stability(ctx, setup_for(c, v.grids.front(), v.stable_profile), ctx.dir / "stability");
    ctx.summary["stability"] = {{"runs", st.runs.size()}, {"ok", st.ok()}};
}

const char* status_name(int code) {
    switch (code) {
        case ExitPass: return "pass";
        case ExitCertificate: return "certificate_failure";
        case ExitUsage: return "usage_error";
        default: return "numerical_failure";
    }
}

}  // namespace

const char* tool_version() { return RTSPECTRA_VERSION; }

fs::path output_dir(const RunConfig& cfg) {
    if (!cfg.output.empty()) return cfg.output;
    const char* root = std::getenv(kOutputRootEnv);
    return fs::path(root && *root ? root : "runs") / to_string(cfg.command);
}

int exit_code_for_current_exception(std::string& type, std::string& message) {
    try {
        throw;
    } catch (const ConfigError& e) {
        type = "config_error";
        message = e.what();
        return ExitUsage;
    } catch (const ParseError& e) {
        type = "parse_error";
        message = e.what();
        return ExitUsage;
    } catch (const PreconditionError& e) {
        type = "precondition_error";
        message = e.what();
        return ExitUsage;
    } catch (const SolverError& e) {
        type = "solver_error";
        message = e.what();
        return ExitNumerical;
    } catch (const IoError& e) {
        type = "io_error";
        message = e.what();
        return ExitNumerical;
    } catch (const fs::filesystem_error& e) {
        type = "io_error";
        message = e.what();
        return ExitNumerical;
    } catch (const std::invalid_argument& e) {
        type = "invalid_argument";
        message = e.what();
        return ExitUsage;
    } catch (const std::exception& e) {
        type = "runtime_error";
        message = e.what();
        return ExitNumerical;
    }
}

RunOutcome run(const RunConfig& cfg) {
    const auto t0 = Clock::now();
    RunOutcome out;
    out.dir = output_dir(cfg);
    Context ctx{cfg, out.dir, {}, json::object(), true};
    const std::string started = utc_now();
    json failure;
    try {
        cfg.validate();
        fs::create_directories(out.dir);
        switch (cfg.command) {
            case Command::GrowthRate: cmd_growth_rate(ctx); break;
            case Command::AlphaSweep: cmd_alpha_sweep(ctx); break;
            case Command::EvolveLinear: cmd_evolve(ctx, EvolutionMode::Linear); break;
            case Command::EvolveNonlinear: cmd_evolve(ctx, EvolutionMode::Nonlinear); break;
            case Command::EscapeTime: cmd_escape_time(ctx); break;
            case Command::StabilitySuite: {
                const StabilityResult r = stability(ctx, setup_for(cfg), ctx.dir);
                ctx.summary["runs"] = r.runs.size();
                break;
            }
            case Command::VerifyAll: cmd_verify_all(ctx); break;
        }
        out.exit_code = ctx.certificates_ok ? ExitPass : ExitCertificate;
    } catch (...) {
        std::string type, message;
        out.exit_code = exit_code_for_current_exception(type, message);
        failure = {{"exit_code", out.exit_code}, {"type", type}, {"message", message}};
        try {
            throw;
        } catch (const ConfigError& e) {
            failure["field"] = e.field();
        } catch (const ParseError& e) {
            failure["byte_offset"] = e.offset();
        } catch (const SolverError& e) {
            failure["last_residual"] = finite_or_null(e.last_residual());
        } catch (...) {
        }
    }

    out.manifest = {
        {"tool", "rtspectra"},
        {"version", tool_version()},
        {"command", to_string(cfg.command)},
        {"config", to_json(cfg)},
        {"workers", cfg.resolved_workers()},
        {"output_dir", out.dir.string()},
        {"started_at", started},
        {"wall_time_s", std::chrono::duration<double>(Clock::now() - t0).count()},
        {"stages", ctx.stages.log()},
        {"outcome", {{"exit_code", out.exit_code}, {"status", status_name(out.exit_code)}, {"summary", ctx.summary}}},
    };
    if (!failure.is_null()) out.manifest["outcome"]["failure"] = failure;
    // a run that cannot even create its directory still reports on stderr via the caller
    try {
        if (!failure.is_null()) write_json_atomic(out.dir / "failure.json", failure);
        write_json_atomic(out.dir / "manifest.json", out.manifest);
    } catch (const std::exception&) {
        if (out.exit_code == ExitPass) out.exit_code = ExitNumerical;
        out.manifest["outcome"]["exit_code"] = out.exit_code;
    }
    return out;
}

}  // namespace rtspectra
