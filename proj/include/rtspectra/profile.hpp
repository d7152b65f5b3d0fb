/// @file profile.hpp
/// @brief Steady density profiles rho(x_g) along the gravity axis, their
/// classification, and the physical parameters.
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rtspectra/field.hpp"

namespace rtspectra {

struct PhysicalParams {
    double mu = 0.1;  ///< shear viscosity
    double g = 1.0;   ///< gravitational constant

    /// Throws std::invalid_argument naming the violated constraint.
    void validate() const;
};

enum class ProfileKind { Linear, Exponential, Tanh, Tabulated };

/// Exactly one class is assigned; uniformly unstable profiles are also
/// RT-unstable but are reported under the more specific label.
enum class Stratification { UniformlyUnstable, RtUnstable, Stable, Indeterminate };

const char* to_string(Stratification s);

class DensityProfile {
public:
    /// rho = a + b z
    static DensityProfile linear(double a, double b);
    /// rho = a exp(b z)
    static DensityProfile exponential(double a, double b);
    /// rho = a + b tanh((z - c) / w)
    static DensityProfile tanh(double a, double b, double c, double w);
    /// Monotone cubic (PCHIP) interpolant through (z, rho) samples.
    static DensityProfile tabulated(std::vector<double> z, std::vector<double> rho, std::string source = {});
    /// Reads a two-column text table ("z rho" per line, '#' comments).
    /// Throws ParseError with the byte offset of the first bad token.
    static DensityProfile tabulated_file(const std::string& path);
    /// Parses "linear(a,b)", "exponential(a,b)", "tanh(a,b,c,w)" or "tabulated(path)".
    static DensityProfile parse(const std::string& spec);

    ProfileKind kind() const { return kind_; }
    const std::vector<double>& parameters() const { return params_; }
    /// Canonical spec string; parse(spec()) reproduces the profile.
    std::string spec() const;

    double rho(double z) const;
    double drho(double z) const;
    /// Second derivative; absent for tabulated profiles.
    std::optional<double> d2rho(double z) const;

    /// inf / sup over [0, height] of rho and rho' by dense sampling.
    struct Bounds {
        double rho_min, rho_max, drho_min, drho_max, ratio_max;  ///< ratio = rho'/rho
    };
    Bounds bounds(double height) const;

    /// Strict sign tests carry a relative margin: inf rho' must exceed
    /// margin * sup|rho'| for "uniformly unstable" (and symmetrically for
    /// "stable"), so that 1/rho' stays representable.
    Stratification classify(double height, double margin = 1e-3) const;

    /// Throws PreconditionError if rho <= 0 at any cell center or face of grid.
    void validate_on(const StaggeredGrid& grid) const;

private:
    ProfileKind kind_ = ProfileKind::Linear;
    std::vector<double> params_;
    std::string source_;
    struct Table;
    std::shared_ptr<const Table> table_;
};

/// Profile quantities sampled on a grid, shared by every solver.
struct ProfileSamples {
    ScalarField rho;        ///< rho at cell centers
    ScalarField drho;       ///< rho' at cell centers
    VectorField face_rho;   ///< face_average(rho)
    double rho_min = 0.0;
    double drho_abs_max = 0.0;
    double ratio_max = 0.0;  ///< max over cells of rho'/rho

    static ProfileSamples make(const StaggeredGrid& grid, const DensityProfile& profile);
};

}  // namespace rtspectra
