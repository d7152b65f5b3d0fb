/// @file projection.hpp
/// @brief Discrete Leray projection onto divergence-free, no-penetration fields.
#pragma once

#include <optional>

#include "rtspectra/solvers.hpp"

namespace rtspectra {

/// P v = v - beta grad(phi) with div(beta grad phi) = div v.
///
/// With beta = 1 this is the orthogonal projector of the unweighted face
/// inner product; with beta = 1/rho it is orthogonal in the rho-weighted one.
class Projector {
public:
    Projector() = default;
    explicit Projector(const StaggeredGrid& grid, double tol = 1e-10);

    /// Switches to the density-weighted projection (beta = 1 / face_density).
    void set_density(const VectorField& face_density);
    void clear_density();

    /// Throws PreconditionError if v has nonzero wall-normal faces and
    /// SolverError if the Poisson solve does not converge.
    VectorField project(const VectorField& v, ScalarField* potential = nullptr) const;
    /// In-place variant used in inner loops.
    void project_in_place(VectorField& v, ScalarField* potential = nullptr) const;

    const PressurePoisson& poisson() const { return poisson_; }
    double tolerance() const { return poisson_.tolerance(); }

private:
    PressurePoisson poisson_{};
};

/// One-shot unweighted projection.
VectorField leray_project(const VectorField& v, double tol = 1e-10);

}  // namespace rtspectra
