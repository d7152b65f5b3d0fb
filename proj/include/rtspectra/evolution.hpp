/// @file evolution.hpp
/// @brief Time stepping of the linearized and nonlinear perturbation
/// systems with per-step energy monitors.
///
/// Both steppers use the discrete structure of the spectral problem: face
/// mass rho_f, buoyancy coupling A / A^T between cells and gravity faces, and
/// a pressure projection orthogonal in the rho_f-weighted inner product. The
/// semi-discrete linear system therefore has exactly the discrete growth rate
/// Lambda, and its Lyapunov / dual energies obey their identities exactly; the
/// time discretisation adds O(dt).
///
/// Linear step (first order, split, incremental pressure):
///   (rho_f - dt mu lap) u* = rho_f u - dt g A^T rho - dt grad(q)
///   u <- u* - dt grad(dq) / rho_f,   div u = 0,   q <- q + dq
///   rho <- rho - dt rho' A u3      (new u)
/// Carrying q through the viscous solve keeps the (large, nearly
/// hydrostatic) pressure gradient out of the no-slip splitting error. With
/// this ordering the energy balance per step is exact up to terms quadratic
/// in the step increments.
///
/// Nonlinear step, same ordering: explicit upwind momentum advection and
/// implicit viscosity with the current total density, variable-density
/// projection, then transport of the total density by the new velocity.
/// Transport defaults to flux-corrected (FCT); plain donor-cell has an
/// O(h |grad u|) bias on the stratified background that shows up as an
/// energy source independent of dt.
#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rtspectra/profile.hpp"
#include "rtspectra/projection.hpp"
#include "rtspectra/spectra.hpp"

namespace rtspectra {

enum class EvolutionMode { Linear, Nonlinear };
enum class DensityScheme { Upwind, Fct, SemiLagrangian };

std::string to_string(EvolutionMode m);
std::string to_string(DensityScheme s);

struct SimState {
    double t = 0.0;
    long step = 0;
    ScalarField rho_pert;  ///< perturbation of the density
    VectorField velocity;
    ScalarField pressure;
    EvolutionMode mode = EvolutionMode::Linear;

    static SimState zero(const StaggeredGrid& grid, EvolutionMode mode);
};

/// Rescaled eigenmode: velocity and density mode of `sol` multiplied by
/// `amplitude / E` where E = sqrt(||rho~||^2 + ||v||_{H2,discrete}^2).
SimState eigenmode_state(const EigenSolution& sol, double amplitude, EvolutionMode mode);

/// Seeded random state: white noise filtered by (1 - ell^2 lap)^-2 on both
/// fields, velocity projected, then the pair scaled so that
/// sqrt(||rho||^2 + ||u||^2) = amplitude. `ell` defaults to 4 cells.
SimState random_state(const StaggeredGrid& grid, std::uint64_t seed, double amplitude, EvolutionMode mode,
                      std::optional<double> ell = std::nullopt);

struct StepInfo {
    int viscous_iterations = 0;
    int pressure_iterations = 0;
    double density_min_before = 0.0, density_max_before = 0.0;  ///< total density, nonlinear only
    double density_min_after = 0.0, density_max_after = 0.0;
};

class LinearStepper {
public:
    LinearStepper(const StaggeredGrid& grid, const DensityProfile& profile, const PhysicalParams& params,
                  double projection_tol = 1e-11);
    StepInfo step(SimState& s, double dt) const;
    const ProfileSamples& samples() const { return samples_; }

private:
    StaggeredGrid grid_;
    PhysicalParams params_;
    ProfileSamples samples_;
    Projector projector_;
    ViscousSolver viscous_;
};

struct NonlinearOptions {
    DensityScheme scheme = DensityScheme::Fct;
    double bound_tol = 1e-10;  ///< allowed max-principle overshoot per step, relative to max rho
    double projection_tol = 1e-11;
};

class NonlinearStepper {
public:
    NonlinearStepper(const StaggeredGrid& grid, const DensityProfile& profile, const PhysicalParams& params,
                     const NonlinearOptions& opts = {});
    /// Throws PreconditionError when the total density is not positive and
    /// SolverError when the transport overshoots its bounds (CFL breach).
    StepInfo step(SimState& s, double dt);
    const ProfileSamples& samples() const { return samples_; }
    const NonlinearOptions& options() const { return opts_; }

private:
    StaggeredGrid grid_;
    PhysicalParams params_;
    ProfileSamples samples_;
    NonlinearOptions opts_;
    Projector projector_;
    ViscousSolver viscous_;
};

/// dt = min(fixed or viscous bound, cfl * h / ||u||_inf, max_dt). The viscous
/// bound factor * h^2 rho_min / mu is the default; implicit viscosity makes
/// it an accuracy rather than a stability limit, so runs may switch it off
/// and give a fixed step instead.
struct DtPolicy {
    std::optional<double> fixed;
    double cfl = 0.25;
    double viscous_factor = 0.25;
    bool viscous_limit = true;
    double max_dt = std::numeric_limits<double>::infinity();

    double next(const SimState& s, const StaggeredGrid& grid, double rho_min, double mu) const;
    nlohmann::json to_json() const;
};

struct MonitorRecord {
    double t = 0.0;
    double dt = 0.0;
    double rho_l2 = 0.0;
    double u_l2 = 0.0;
    double u3_l2 = 0.0;
    double uh_l2 = 0.0;  ///< non-gravity components
    double grad_u_sq = 0.0;
    double h1 = 0.0;  ///< sqrt(||u||^2 + ||grad u||^2)
    double h2 = 0.0;  ///< discrete H2
    double ut_l2 = std::nan("");
    double lyapunov = std::nan("");             ///< sum(g rho^2 / -rho') + sum(rho_f u^2), stable profiles
    double lyapunov_rate_scale = std::nan("");  ///< same functional of the backward time difference
    double dual_energy = std::nan("");          ///< sum(rho^2 / rho') + sum(rho_f u^2) / g, rho' > 0
    double dual_rate_scale = std::nan("");
    double dissipation_integral = 0.0;  ///< sum over steps of dt ||grad u||^2
    double rho_min = std::nan("");      ///< total density (nonlinear)
    double rho_max = std::nan("");
    double div_max = 0.0;

    double norm() const { return std::sqrt(rho_l2 * rho_l2 + u_l2 * u_l2); }
};

struct MonitorTrace {
    std::vector<MonitorRecord> records;

    /// Throws PreconditionError unless t increases strictly.
    void append(const MonitorRecord& r);
    std::size_t size() const { return records.size(); }
    const MonitorRecord& back() const { return records.back(); }
    void write_csv(const std::filesystem::path& path) const;
    static std::vector<std::string> columns();
};

/// Computes records from consecutive states.
class Monitor {
public:
    Monitor(const StaggeredGrid& grid, const DensityProfile& profile, const PhysicalParams& params);
    MonitorRecord record(const SimState& cur, const SimState* prev, double dt, double dissipation_so_far) const;

private:
    double lyapunov(const ScalarField& rho, const VectorField& u, const VectorField& face_rho) const;
    double dual(const ScalarField& rho, const VectorField& u) const;

    StaggeredGrid grid_;
    PhysicalParams params_;
    ProfileSamples samples_;
    bool stable_ = false;
    bool positive_ = false;
};

struct RunOptions {
    double t_end = 1.0;
    long max_steps = 1'000'000;
    DtPolicy dt{};
    int checkpoint_every = 0;  ///< 0 disables
    std::filesystem::path checkpoint_dir;
    /// Evaluated after every record; returning true stops the run.
    std::function<bool(const MonitorRecord&)> stop;
};

/// Grid, profile and parameters plus the stepper of the requested mode.
class Simulation {
public:
    Simulation(const StaggeredGrid& grid, const DensityProfile& profile, const PhysicalParams& params,
               EvolutionMode mode, const NonlinearOptions& nl = {});

    /// Advances `s` in place, recording the initial state and every step.
    MonitorTrace run(SimState& s, const RunOptions& opts);
    StepInfo step(SimState& s, double dt);

    const StaggeredGrid& grid() const { return grid_; }
    EvolutionMode mode() const { return mode_; }

private:
    StaggeredGrid grid_;
    DensityProfile profile_;
    PhysicalParams params_;
    EvolutionMode mode_;
    std::optional<LinearStepper> linear_;
    std::optional<NonlinearStepper> nonlinear_;
    Monitor monitor_;
};

/// Writes rho.rtsf, velocity.rtsf and pressure.rtsf under dir/step_NNNNNNNN.
void write_checkpoint(const std::filesystem::path& dir, const SimState& s);

/// Least-squares slope of log ||(rho, u)|| over records with t in [t0, t1].
/// Throws PreconditionError with fewer than 10 records in the window.
double measure_growth_rate(const MonitorTrace& trace, double t0, double t1);

struct StableDecayReport {
    bool zero_initial = false;          ///< C undefined, flagged
    double max_identity_ratio = 0.0;    ///< max residual / (5 dt scale)
    bool identity_ok = false;
    std::vector<double> identity_residuals;  ///< |(L1 - L0)/dt + 2 mu ||grad u1||^2| per step
    double mean_identity_residual = 0.0;
    double dissipation_integral = 0.0;
    double c_estimate = 0.0;  ///< max(L(t) + 2 mu int ||grad u||^2) / L(0)
    double h1_initial = 0.0;
    double h1_final = 0.0;
    bool decay_ok = false;  ///< h1_final < 1% h1_initial
    bool ok() const { return identity_ok && decay_ok; }
    nlohmann::json to_json() const;
};

/// Requires a trace with Lyapunov records (stable profile). Throws
/// SolverError when some step exceeds ten times the identity budget.
StableDecayReport stable_decay_report(const MonitorTrace& trace, const PhysicalParams& params);

struct DualEnergyAudit {
    double max_excess = 0.0;  ///< max over steps of D1 / (D0 e^{2 Lambda dt}) - 1
    int violations = 0;
    bool ok = true;
    double fitted_rate = 0.0;  ///< half the log-slope of D over the whole trace
    nlohmann::json to_json() const;
};

/// Per-step check D(t + dt) <= D(t) e^{2 Lambda dt} (1 + eps).
DualEnergyAudit dual_energy_audit(const MonitorTrace& trace, double lambda, double eps = 1e-3);

}  // namespace rtspectra
