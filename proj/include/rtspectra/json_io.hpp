/// @file json_io.hpp
/// @brief JSON descriptions of the run inputs shared by result exports.
#pragma once

#include "json.hpp"
#include "rtspectra/grid.hpp"
#include "rtspectra/profile.hpp"

namespace rtspectra {

nlohmann::json to_json(const StaggeredGrid& grid);
nlohmann::json to_json(const DensityProfile& profile, double height);
nlohmann::json to_json(const PhysicalParams& params);

}  // namespace rtspectra
