/// @file operators.hpp
/// @brief Discrete differential operators, quadratures and coupling maps.
///
/// div and grad are exact adjoints: <grad p, v> = -<p, div v> for every v
/// with zero wall-normal faces. The vector Laplacian uses reflected-ghost
/// Dirichlet closure and is symmetric negative definite on interior faces.
#pragma once

#include "rtspectra/field.hpp"

namespace rtspectra {

ScalarField discrete_divergence(const VectorField& v);
VectorField discrete_gradient(const ScalarField& p);
VectorField discrete_laplacian(const VectorField& v);

/// Interpolates a cell-centered weight to faces: the mean of the two adjacent
/// cells on interior faces, the adjacent cell on wall faces.
VectorField face_average(const ScalarField& w);

/// Midpoint-quadrature inner product sum(w_f a_f b_f) V, weights averaged to
/// faces. Throws PreconditionError when some weight is <= 0.
double weighted_inner(const VectorField& a, const VectorField& b, const ScalarField& w);
/// Same quadrature with precomputed face weights (no positivity check).
double face_weighted_inner(const VectorField& a, const VectorField& b, const VectorField& face_w);
double unweighted_inner(const VectorField& a, const VectorField& b);
double cell_inner(const ScalarField& a, const ScalarField& b);

/// ||grad v||^2 for a no-slip field; equals -<lap v, v>.
double h1_seminorm_sq(const VectorField& v);

/// Averages the gravity component of `v` to cell centers (operator A).
ScalarField gravity_to_cells(const VectorField& v);
/// Adjoint of gravity_to_cells on no-slip fields: spreads a cell field onto
/// interior gravity faces (operator A^T); other components are zero.
VectorField cells_to_gravity(const ScalarField& s);

/// sqrt(||v||^2 + ||grad v||^2 + ||lap v||^2); the discrete stand-in for H^2.
double discrete_h2_norm(const VectorField& v);

}  // namespace rtspectra
