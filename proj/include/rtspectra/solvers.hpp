/// @file solvers.hpp
/// @brief Preconditioned conjugate gradients and the two elliptic problems
/// the library needs: the (variable-coefficient) Neumann pressure Poisson
/// problem and the implicit viscous (rho - kappa * Laplacian) problem.
#pragma once

#include <functional>
#include <optional>
#include <span>

#include "rtspectra/field.hpp"
#include "rtspectra/spectral.hpp"

namespace rtspectra {

using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

struct CgStats {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

/// Solves A x = b for symmetric positive (semi)definite A. `x` holds the
/// initial guess on entry. Convergence: ||b - A x|| <= tol * ||b||.
CgStats conjugate_gradient(const LinearMap& apply, const LinearMap& precond, std::span<const double> b,
                           std::span<double> x, double tol, int max_iterations);

/// div(beta grad phi) = rhs with homogeneous Neumann walls and zero-mean phi.
/// `beta` defaults to one on every face; the separable constant-coefficient
/// inverse is the preconditioner, so the unit case converges in one sweep.
class PressurePoisson {
public:
    PressurePoisson() = default;
    explicit PressurePoisson(const StaggeredGrid& grid, double tol = 1e-10, int max_iterations = 500);

    /// Face coefficients; pass std::nullopt to return to the unit problem.
    void set_coefficient(std::optional<VectorField> beta);
    const std::optional<VectorField>& coefficient() const { return beta_; }

    /// Throws SolverError when the tolerance is not met.
    ScalarField solve(const ScalarField& rhs, CgStats* stats = nullptr) const;
    /// beta * grad(phi) on faces.
    VectorField flux(const ScalarField& phi) const;

    double tolerance() const { return tol_; }
    const StaggeredGrid& grid() const { return grid_; }

private:
    StaggeredGrid grid_{};
    SeparableSolver fast_{};
    std::optional<VectorField> beta_;
    double beta_mean_ = 1.0;
    double tol_ = 1e-10;
    int max_iterations_ = 500;
};

/// (diag(w) - kappa * Laplacian) u = rhs on interior faces with no-slip
/// closures; `w` are positive face weights (typically the face density).
class ViscousSolver {
public:
    ViscousSolver() = default;
    ViscousSolver(const StaggeredGrid& grid, double tol = 1e-12, int max_iterations = 500);

    VectorField solve(const VectorField& face_weight, double kappa, const VectorField& rhs,
                      const VectorField* initial_guess = nullptr, CgStats* stats = nullptr) const;

private:
    StaggeredGrid grid_{};
    std::array<SeparableSolver, 3> fast_{};
    double tol_ = 1e-12;
    int max_iterations_ = 500;
};

}  // namespace rtspectra
