/// @file advection.hpp
/// @brief First-order upwind transport kernels for the nonlinear stepper.
///
/// Same split as kernels.hpp: `reference` loops element by element, `omp`
/// distributes rows over threads; both evaluate the same per-element
/// expression, so their outputs agree bitwise.
#pragma once

#include "rtspectra/field.hpp"

namespace rtspectra::advection {

namespace reference {
/// Donor-cell update out = rho - dt div(F), F_f = u_f * rho_upwind. For a
/// divergence-free u and sum_a dt |u_a| / h_a <= 1 the result is a convex
/// combination of neighbouring values (discrete max principle).
void upwind_density(const ScalarField& rho, const VectorField& u, double dt, ScalarField& out);
/// (u . grad) u on interior faces with upwinded one-sided differences; wall
/// faces are set to zero.
void momentum(const VectorField& u, VectorField& out);
/// Donor-cell plus Zalesak-limited centered antidiffusion. Each cell stays
/// within the range of rho and of the donor-cell result over itself and its
/// face neighbours, so global bounds hold; where the limiter is inactive the
/// flux is centered and carries no upwind bias on a linear background.
void fct_density(const ScalarField& rho, const VectorField& u, double dt, ScalarField& out);
}  // namespace reference

namespace omp {
void upwind_density(const ScalarField& rho, const VectorField& u, double dt, ScalarField& out);
void momentum(const VectorField& u, VectorField& out);
void fct_density(const ScalarField& rho, const VectorField& u, double dt, ScalarField& out);
}  // namespace omp

/// Back-traces cell centers with the cell-averaged velocity and bilinear
/// (trilinear) interpolation; departure points are clamped to the box of
/// cell centers. Interpolation weights are convex, so bounds are preserved.
void semi_lagrangian_density(const ScalarField& rho, const VectorField& u, double dt, ScalarField& out);

/// max over cells of sum_a |u| / h_a, using the larger adjacent face value.
double cfl_rate(const VectorField& u);

}  // namespace rtspectra::advection
