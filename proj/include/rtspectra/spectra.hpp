/// @file spectra.hpp
/// @brief Modified energy functionals and the constrained maximisation
/// alpha(s) as discrete eigenvalue problems on divergence-free fields.
///
/// Discrete forms (V the cell volume, A the face-to-cell average of the
/// vertical component, sums over interior faces / cells):
///
///     buoyancy     g  sum_c rho'_c (A v3)_c^2 V
///     dissipation  mu sum |grad v|^2 V          = -mu <lap v, v>
///     mass         sum_f rho_f v_f^2 V          rho_f = face average of rho
///
/// alpha(s) is the top eigenvalue of A(s) v = alpha M v on the range of the
/// Leray projector with A(s) = g A^T rho' A + s mu lap and M = rho_f.
#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "json.hpp"
#include "rtspectra/profile.hpp"
#include "rtspectra/projection.hpp"
#include "rtspectra/spectral.hpp"

namespace rtspectra {

struct EigenOptions {
    double tol = 1e-10;  ///< relative Ritz residual
    int max_iterations = 4000;
    std::uint64_t seed = 1;
    int block = 2;
    double projection_tol = 1e-12;
};

struct EnergyBreakdown {
    double s = 0.0;
    double buoyancy = 0.0;
    double dissipation = 0.0;  ///< already multiplied by mu
    double mass = 0.0;
    double value(double at) const { return buoyancy - at * dissipation; }
    double value() const { return value(s); }
};

/// Eigenfield of the boundary problem at parameter s:
///   alpha rho v + s grad q = s mu lap v + g rho' v3 e3,   rho~ = -rho' v3 / s.
/// For s = 0 the pressure holds the raw projection potential and the
/// density mode is zero.
struct EigenSolution {
    double eigenvalue = 0.0;
    double s = 0.0;
    VectorField velocity;
    ScalarField pressure;
    ScalarField density_mode;
    double residual_norm = 0.0;
    double second_eigenvalue = 0.0;
    int iterations = 0;
};

/// Grid, sampled profile and physical parameters bundled with the solvers
/// every functional needs. All members are immutable after construction, so
/// one model may be shared by concurrent evaluations.
class SpectralModel {
public:
    SpectralModel(const StaggeredGrid& grid, const DensityProfile& profile, const PhysicalParams& params,
                  double projection_tol = 1e-12);

    const StaggeredGrid& grid() const { return grid_; }
    const DensityProfile& profile() const { return profile_; }
    const PhysicalParams& params() const { return params_; }
    const ProfileSamples& samples() const { return samples_; }
    const Projector& projector() const { return projector_; }
    Stratification stratification() const { return strat_; }

    /// g A^T(rho' A v3) + s mu lap v, zero on wall faces.
    VectorField apply_operator(const VectorField& v, double s) const;
    /// g A^T(rho' A v3) alone.
    VectorField buoyancy_force(const VectorField& v) const;
    VectorField apply_mass(const VectorField& v) const;
    /// Enforces no-slip and projects in place.
    void project(VectorField& v, ScalarField* potential = nullptr) const;
    /// Solves (c - kappa lap) x = r per component with the separable bases.
    void separable_solve(double c, double kappa, std::span<const double> r, std::span<double> x) const;
    /// Spectral radius of the vector Laplacian.
    double laplacian_norm() const { return lap_norm_; }
    /// g * max(0, max_c rho'_c / rho_c): bounds alpha(s) from above.
    double alpha_upper_bound() const;

private:
    StaggeredGrid grid_;
    DensityProfile profile_;
    PhysicalParams params_;
    ProfileSamples samples_;
    Projector projector_;
    std::array<SeparableSolver, 3> fast_{};
    double lap_norm_ = 0.0;
    Stratification strat_ = Stratification::Indeterminate;
};

/// Throws PreconditionError if v is not divergence free (relative to its size).
EnergyBreakdown energy_E(const VectorField& v, double s, const SpectralModel& model);

/// alpha(s) and its maximiser (J = 1, sign fixed so that the largest |v3|
/// entry is positive). `warm` seeds the iteration.
EigenSolution alpha(double s, const SpectralModel& model, const EigenOptions& opts = {},
                    const EigenSolution* warm = nullptr);

/// Smallest eigenvalue of -lap on discrete divergence-free no-slip fields.
double stokes_lambda1(const StaggeredGrid& grid, const EigenOptions& opts = {});

struct BumpOptions {
    std::optional<double> radius_cap;  ///< limits the vertical radius
};

struct BumpCertificate {
    double c3 = 0.0;  ///< buoyancy / mass
    double c4 = 0.0;  ///< dissipation / mass
    double center = 0.0;
    double radius = 0.0;
    VectorField field;
};

/// Compactly supported discrete-curl bump centred where rho' peaks. Throws
/// PreconditionError("no positive rho' region") on stable profiles.
BumpCertificate bump_certificate(const SpectralModel& model, const BumpOptions& opts = {});

struct UpperBracket {
    double s_hat = 0.0;
    double s_cap = 0.0;   ///< c5 / mu: alpha(s) <= 0 guaranteed beyond it
    double c5 = 0.0;      ///< g max(rho'+) / lambda1
    double lambda1 = 0.0;
    double certified_below = 0.0;  ///< c3 / c4 of the bump: alpha > 0 below it
    std::vector<std::pair<double, double>> evaluations;  ///< (s, alpha)
};

UpperBracket s_upper_bracket(const SpectralModel& model, const EigenOptions& opts = {});

struct DualEnergy {
    double e_n = 0.0;
    double j_n = 0.0;
};

/// Requires a uniformly unstable profile (J_N positive definite).
DualEnergy energy_EN(const ScalarField& rho, const VectorField& v, const SpectralModel& model);

struct DualSolution {
    double lambda_n = 0.0;
    EigenSolution eigen;  ///< velocity and density_mode normalised to J_N = 1
    double elimination_error = 0.0;  ///< ||rho~ + rho' A v3 / Lambda_N|| / ||rho~||
};

DualSolution lambda_N(const SpectralModel& model, const EigenOptions& opts = {});

struct AlphaSample {
    double s = 0.0;
    double alpha = 0.0;
    double residual = 0.0;
    int iterations = 0;
    double dissipation_ratio = 0.0;  ///< mu |grad v|^2 / mass of the maximiser
};

struct AlphaCurve {
    std::vector<AlphaSample> samples;  ///< sorted by s
    double c3 = 0.0;
    double c4 = 0.0;
    bool has_certificate = false;
    double upper_bound = 0.0;
    std::optional<double> s_upper;
    double lipschitz = 0.0;  ///< max dissipation ratio

    bool monotone(double tol) const;
    bool lower_bound_holds(double tol) const;
    bool upper_bound_holds(double tol) const;
    bool lipschitz_holds(double tol) const;

    /// Columns: s, alpha, residual, c3_minus_c4s, upper_bound.
    void write_csv(const std::filesystem::path& path) const;
    nlohmann::json to_json() const;
};

/// Samples alpha at the given s values. Samples are independent cold
/// starts distributed over `workers` threads; the result does not depend
/// on the worker count.
AlphaCurve sample_alpha_curve(const SpectralModel& model, std::vector<double> s_values, const EigenOptions& opts = {},
                              int workers = 1);

/// Normalises the sign so that the largest-magnitude vertical entry is positive.
void fix_sign(VectorField& v, ScalarField* companion = nullptr);

}  // namespace rtspectra
