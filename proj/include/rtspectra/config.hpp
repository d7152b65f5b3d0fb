/// @file config.hpp
/// @brief Run configuration: JSON schema, defaults, overrides, validation.
///
/// The schema is the JSON produced by `to_json(RunConfig{})`; a document may
/// contain any subset of its keys. Unknown keys and type mismatches are
/// reported with the dotted path of the field (ConfigError::field()).
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rtspectra/experiments.hpp"
#include "rtspectra/grid.hpp"
#include "rtspectra/profile.hpp"

namespace rtspectra {

enum class Command { GrowthRate, AlphaSweep, EvolveLinear, EvolveNonlinear, EscapeTime, StabilitySuite, VerifyAll };

std::string to_string(Command c);
/// Throws ConfigError("command", ...) for unknown names.
Command parse_command(const std::string& name);
const std::vector<std::string>& command_names();

/// Box and resolution. Text form "32x32" or "16x16x16" (unit lengths,
/// gravity along the last axis).
struct GridSpec {
    int dim = 2;
    std::array<int, 3> cells{32, 32, 1};
    std::array<double, 3> lengths{1.0, 1.0, 1.0};
    int gravity_axis = 1;

    static GridSpec parse(const std::string& text);
    StaggeredGrid make() const;
    std::string text() const;
};

struct Tolerances {
    double eigen = 1e-10;          ///< relative Ritz residual
    double fixed_point = 1e-8;     ///< |s^2 - alpha(s)|
    double projection = 1e-12;     ///< Leray projection in the spectral model
    double evolution_projection = 1e-11;
};

struct AlphaSweepConfig {
    double s_min = 0.0;
    std::optional<double> s_max;  ///< default: the fixed-point bracket sqrt(g max rho'/rho)
    int count = 20;
};

struct EvolveConfig {
    std::string init = "random";  ///< random | eigenmode | zero
    double amplitude = 1e-3;
    double t_end = 10.0;
    std::optional<double> dt;  ///< fixed step; default is the DtPolicy bound
    double cfl = 0.25;
    double viscous_factor = 0.25;
    int checkpoint_every = 0;
    std::string scheme = "fct";  ///< fct | upwind | semi_lagrangian
};

struct VerifyAllConfig {
    std::string unstable_profile = "linear(1,1)";
    std::string stable_profile = "linear(2,-1)";
    std::vector<std::string> grids{"32x32", "48x48"};  ///< growth stages run on every grid, the rest on the first
};

struct RunConfig {
    Command command = Command::GrowthRate;
    GridSpec grid{};
    std::string profile = "linear(1,1)";
    PhysicalParams params{};
    Tolerances tolerances{};
    std::uint64_t seed = 1;
    std::string output;  ///< empty: <output root>/<command>
    int workers = 0;     ///< 0: hardware concurrency
    AlphaSweepConfig alpha_sweep{};
    EvolveConfig evolve{};
    EscapeTimeConfig escape_time{};
    SharpGrowthConfig sharp_growth{};
    StabilityConfig stability{};
    VerifyAllConfig verify_all{};

    /// Throws ConfigError naming the field and the violated constraint.
    void validate() const;
    int resolved_workers() const;
    bool operator==(const RunConfig& o) const;
};

nlohmann::json to_json(const RunConfig& c);
/// Schema-checked conversion; missing keys keep their defaults.
RunConfig config_from_json(const nlohmann::json& j);
/// Parses a JSON document; syntax errors become ConfigError("<document>").
RunConfig parse_config(const std::string& text);

/// Applies "a.b.c=value" to a JSON document; value is read as JSON when it
/// parses, otherwise as a string. Unknown paths are rejected later by
/// config_from_json.
void apply_override(nlohmann::json& doc, const std::string& assignment);

DensityScheme parse_scheme(const std::string& name);

/// Command-line values layered over a file document. Flags override the
/// file; two flags naming the same key with different values (including
/// --seed against --set seed=...) are a ConfigError.
struct CliOverrides {
    std::string command;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};
nlohmann::json apply_cli(nlohmann::json doc, const CliOverrides& cli);

}  // namespace rtspectra
