#include "rtspectra/json_io.hpp"

namespace rtspectra {

nlohmann::json to_json(const StaggeredGrid& grid) {
    nlohmann::json cells = nlohmann::json::array();
    nlohmann::json lengths = nlohmann::json::array();
    for (int a = 0; a < grid.dim(); ++a) {
        cells.push_back(grid.cells(a));
        lengths.push_back(grid.length(a));
    }
    return {{"dim", grid.dim()}, {"cells", cells}, {"lengths", lengths}, {"gravity_axis", grid.gravity_axis()}};
}

nlohmann::json to_json(const DensityProfile& profile, double height) {
    return {{"spec", profile.spec()}, {"classification", to_string(profile.classify(height))}};
}

nlohmann::json to_json(const PhysicalParams& params) { return {{"mu", params.mu}, {"g", params.g}}; }

}  // namespace rtspectra
