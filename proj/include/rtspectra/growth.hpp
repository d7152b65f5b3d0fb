/// @file growth.hpp
/// @brief Fixed point Lambda = sqrt(alpha(Lambda)) and its certificates.
///
/// phi(s) = s^2 - alpha(s) is strictly increasing, negative at 0 when the
/// profile admits instability and nonnegative at sqrt(g sup rho'/rho), so
/// plain bisection on that interval is safe against eigensolver noise.
#pragma once

#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rtspectra/spectra.hpp"

namespace rtspectra {

struct GrowthOptions {
    EigenOptions eigen{};
    double fixed_point_tol = 1e-8;  ///< |s^2 - alpha(s)| <= tol max(1, s^2)
    int max_bisections = 200;
    double polish_factor = 1e-2;  ///< eigen tol multiplier for the final solve at the root
    bool cross_check = true;  ///< also solve the dual pencil when uniformly unstable
};

struct Nondegeneracy {
    bool v3_nonzero = false;
    bool horizontal_nonzero = false;
};

struct GrowthRateResult {
    std::optional<double> lambda;  ///< absent for the no-instability verdict
    double alpha_at_lambda = 0.0;
    std::optional<double> alpha0;  ///< reported with the verdict when computable
    double alpha0_bound = 0.0;     ///< g max(rho'/rho), rigorous upper bound on alpha(0)
    Stratification stratification = Stratification::Indeterminate;
    EigenSolution eigen;
    std::vector<std::pair<double, double>> bracket_history;  ///< (s, alpha(s)) in evaluation order
    double bracket_hi = 0.0;
    double pde_residual = 0.0;
    Nondegeneracy nondegeneracy;
    std::optional<double> lambda_N;
    std::optional<double> lambda_vs_lambdaN_gap;
    int bisections = 0;

    bool unstable() const { return lambda.has_value(); }
    double fixed_point_defect() const { return lambda ? *lambda * *lambda - alpha_at_lambda : 0.0; }
    nlohmann::json to_json(const SpectralModel& model) const;
    /// velocity.rtsf, pressure.rtsf and density.rtsf in `dir`; nothing for a verdict.
    void save_fields(const std::filesystem::path& dir) const;
};

GrowthRateResult solve_growth_rate(const SpectralModel& model, const GrowthOptions& opts = {});

/// ||L^2 rho v + L grad q - L mu lap v - g A^T rho' A v3|| / ||L^2 rho v|| on
/// interior faces. Throws PreconditionError for lambda <= 0 or a zero field.
double pde_residual(const EigenSolution& sol, double lambda, const SpectralModel& model);

/// ||v3|| >= 1e-8 ||v|| and the analogue for the horizontal components.
Nondegeneracy check_nondegeneracy(const VectorField& v);

struct LambdaCrossCheck {
    double lambda = 0.0;
    double lambda_n = 0.0;
    double gap = 0.0;
};

/// Requires a uniformly unstable profile.
LambdaCrossCheck cross_check_lambda_N(const SpectralModel& model, const GrowthOptions& opts = {});

}  // namespace rtspectra
