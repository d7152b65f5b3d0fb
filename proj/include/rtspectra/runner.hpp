/// @file runner.hpp
/// @brief Command dispatch, run directory layout, manifest and exit codes.
///
/// Every run writes `manifest.json` (config echo with all defaults, tool
/// version, wall time, per-stage timings, outcome) atomically at the end.
/// Failed runs additionally write `failure.json`.
#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "rtspectra/config.hpp"

namespace rtspectra {

enum ExitCode : int { ExitPass = 0, ExitCertificate = 1, ExitUsage = 2, ExitNumerical = 3 };

/// Environment variable naming the default output root ("runs" if unset).
inline constexpr const char* kOutputRootEnv = "RTSPECTRA_OUTPUT_ROOT";

const char* tool_version();

/// cfg.output if set, else <output root>/<command>.
std::filesystem::path output_dir(const RunConfig& cfg);

struct RunOutcome {
    int exit_code = ExitPass;
    std::filesystem::path dir;
    nlohmann::json manifest;
};

/// Runs the configured command. Exceptions are caught and mapped to exit
/// codes: configuration, precondition and parse errors give 2, solver and
/// I/O failures give 3.
RunOutcome run(const RunConfig& cfg);

/// Exit code for the exception currently being handled.
int exit_code_for_current_exception(std::string& type, std::string& message);

}  // namespace rtspectra
