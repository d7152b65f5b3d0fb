/// @file run_io.hpp
/// @brief Small writers shared by experiment outputs and the CLI.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace rtspectra {

/// Writes to a sibling temporary and renames it over `path`, so readers never
/// see a half-written file.
void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& j);

/// Whitespace-separated columns with a `#` header line, gnuplot-readable.
void write_dat(const std::filesystem::path& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

/// JSON number, or null for NaN / infinities.
nlohmann::json finite_or_null(double x);

}  // namespace rtspectra
