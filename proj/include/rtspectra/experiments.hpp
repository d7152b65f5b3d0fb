/// @file experiments.hpp
/// @brief End-to-end studies: escape time of small eigenmode data, sharpness
/// of the linear growth rate, and decay on stable profiles.
///
/// Every study returns a plain result with `to_json()` and `write(dir)`;
/// `write` produces result.json, per-run trace CSVs and gnuplot .dat files.
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rtspectra/evolution.hpp"
#include "rtspectra/growth.hpp"

namespace rtspectra {

struct ExperimentSetup {
    StaggeredGrid grid;
    DensityProfile profile;
    PhysicalParams params;
    GrowthOptions growth{};
    int workers = 1;  ///< independent runs executed concurrently
};

// --------------------------------------------------------------------------
// escape time

struct EscapeTimeConfig {
    std::vector<double> deltas{1e-2, 5e-3, 2.5e-3, 1.25e-3};
    double epsilon0 = 0.05;
    double dt_fraction = 0.05;     ///< dt = dt_fraction / Lambda, further capped by CFL
    double budget_factor = 3.0;    ///< time budget per delta: factor / Lambda * ln(2 eps0 / delta)
    double slope_tolerance = 0.1;  ///< relative, on slope * Lambda
    double linearity_tolerance = 0.1;
    NonlinearOptions nonlinear{};

    /// deltas positive and strictly decreasing, eps0 > max delta.
    void validate() const;
    nlohmann::json to_json() const;
};

/// Norms of the E = 1 eigenmode: ||rho~||, ||v3||, ||(v1, v2)|| and
/// m0 = min of the three.
struct ModeNorms {
    double rho = 0.0, vertical = 0.0, horizontal = 0.0;
    double m0() const;
};
ModeNorms mode_norms(const EigenSolution& sol);

struct EscapeRun {
    double delta = 0.0;
    /// First crossing of m0 eps0 by ||rho||, ||u3||, ||(u1, u2)||.
    std::optional<double> t_rho, t_vertical, t_horizontal;
    std::optional<double> escape_time;  ///< latest of the three, all crossed
    double budget = 0.0;
    long steps = 0;
    double dt = 0.0;
    /// max |norm / (delta ||mode|| e^{Lambda t}) - 1| while norm <= eps0 / 4
    double linearity_deviation = 0.0;
    MonitorTrace trace;

    bool crossed() const { return escape_time.has_value(); }
    nlohmann::json to_json() const;
};

/// One nonlinear run from delta * (E = 1 eigenmode). delta >= eps0 gives
/// escape_time = 0 without stepping. SolverError from the stepper is
/// rethrown with delta in the message.
EscapeRun escape_run(const ExperimentSetup& setup, const EigenSolution& mode, double lambda, double delta,
                     const EscapeTimeConfig& cfg);

struct EscapeTimeResult {
    EscapeTimeConfig config;
    double lambda_reference = 0.0;
    ModeNorms norms;
    double threshold = 0.0;  ///< m0 eps0
    std::vector<EscapeRun> runs;  ///< sorted by decreasing delta
    double slope = 0.0;           ///< of T vs ln(1/delta)
    double intercept = 0.0;
    double lambda_implied = 0.0;  ///< 1 / slope
    double slope_error = 0.0;     ///< |slope Lambda - 1|
    std::vector<double> halving_increments;  ///< Lambda (T_{i+1} - T_i) / ln 2
    bool all_crossed = false;
    bool monotone = false;
    bool linearity_ok = false;

    bool ok() const;
    nlohmann::json to_json() const;
    void write(const std::filesystem::path& dir) const;
};

/// Throws PreconditionError unless the profile is uniformly unstable.
EscapeTimeResult run_escape_time(const ExperimentSetup& setup, const EscapeTimeConfig& cfg,
                                 const GrowthRateResult* growth = nullptr);

// --------------------------------------------------------------------------
// sharp growth

struct SharpGrowthConfig {
    int n_random = 20;
    std::uint64_t seed = 1;
    double amplitude = 1e-3;
    double dt_fraction = 0.025;  ///< dt = dt_fraction / Lambda
    double t_end = 6.0;          ///< in units of 1 / Lambda
    double fit_start = 1.0;      ///< fit window [fit_start, t_end] / Lambda
    double rate_tolerance = 0.02;
    double constant_tolerance = 0.05;  ///< on the dt-halving change of C

    nlohmann::json to_json() const;
};

struct GrowthRun {
    std::string label;  ///< "eigenmode" or "random_<seed>"
    double rate = 0.0;
    double constant = 0.0;          ///< max_t ||(rho,u)(t)|| / (e^{Lambda t} ||(rho,u)(0)||)
    double constant_half_dt = 0.0;  ///< same with dt / 2
    std::optional<DualEnergyAudit> dual;  ///< uniformly unstable profiles only
    MonitorTrace trace;
    nlohmann::json to_json() const;
};

struct SharpGrowthResult {
    SharpGrowthConfig config;
    double lambda = 0.0;
    GrowthRun eigen;
    std::vector<GrowthRun> random;
    double max_random_rate = 0.0;
    double c_hat = 0.0;
    double c_hat_half_dt = 0.0;
    double c_hat_change = 0.0;  ///< relative

    bool eigen_ok() const;
    bool sharpness_ok() const;
    bool constant_ok() const;
    bool dual_ok() const;  ///< vacuous without dual audits
    bool ok() const;
    nlohmann::json to_json() const;
    void write(const std::filesystem::path& dir) const;
};

/// Requires an unstable profile (positive Lambda).
SharpGrowthResult run_sharp_growth(const ExperimentSetup& setup, const SharpGrowthConfig& cfg,
                                   const GrowthRateResult* growth = nullptr);

// --------------------------------------------------------------------------
// stability

struct StabilityConfig {
    std::vector<double> amplitudes{2.5e-3, 5e-3, 1e-2};
    std::uint64_t seed = 7;
    double dt = 0.1;
    double t_max = 1000.0;  ///< runs stop earlier once ||u||_H1 < 1% of its start
    /// Upper density bound K for nonlinear runs; default 2 max rho.
    std::optional<double> density_bound;
    bool nonlinear = true;
    NonlinearOptions nonlinear_options{};

    nlohmann::json to_json() const;
};

struct StableRun {
    EvolutionMode mode = EvolutionMode::Linear;
    double amplitude = 0.0;
    double initial_lyapunov = 0.0;
    StableDecayReport report;
    bool hypothesis_met = true;  ///< false: nonlinear with non-constant rho'
    double density_min = 0.0, density_max = 0.0;  ///< of the initial total density
    double t_final = 0.0;
    long steps = 0;
    MonitorTrace trace;

    /// identity, decay and L(t) + 2 mu int ||grad u||^2 <= 1.01 L(0); null
    /// when the run lies outside the constant-gradient hypothesis.
    std::optional<bool> passed() const;
    nlohmann::json to_json() const;
};

struct StabilityResult {
    StabilityConfig config;
    bool constant_gradient = false;
    double density_bound = 0.0;
    std::vector<StableRun> runs;
    /// initial Lyapunov ratios of consecutive amplitudes over (a2/a1)^2, minus 1
    std::vector<double> amplitude_scaling_errors;

    bool ok() const;
    nlohmann::json to_json() const;
    void write(const std::filesystem::path& dir) const;
};

/// Requires a stable profile. Nonlinear runs whose initial total density
/// leaves (0, K] are refused with PreconditionError.
StabilityResult run_stability_suite(const ExperimentSetup& setup, const StabilityConfig& cfg);

/// True when rho' varies by at most 1e-10 max|rho'| over the cells.
bool constant_gradient(const ProfileSamples& s);

}  // namespace rtspectra
