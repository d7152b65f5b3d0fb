/// @file kernels.hpp
/// @brief Stencil and reduction kernels on the MAC grid.
///
/// Two implementations with identical signatures:
///   - `kernels::reference` is a literal per-element transcription kept as
///     the test oracle and benchmark baseline;
///   - `kernels::omp` is the row-blocked OpenMP version used by the library.
/// Stencil outputs of the two agree bitwise. Reductions in `omp` sum per-row
/// partials followed by a fixed pairwise tree, so their value does not depend
/// on the thread count; they agree with `reference` to rounding.
///
/// Boundary conventions: wall-normal faces are read as zero; tangential
/// neighbours beyond a wall are linear-reflection ghosts (-value).
#pragma once

#include <span>

#include "rtspectra/field.hpp"

namespace rtspectra::kernels {

namespace reference {
void divergence(const VectorField& v, ScalarField& out);
void gradient(const ScalarField& p, VectorField& out);
/// out_f = coef_f * (grad p)_f
void scaled_gradient(const ScalarField& p, const VectorField& coef, VectorField& out);
void laplacian(const VectorField& v, VectorField& out);
/// Sum over faces of a*b*w*V with half weight on wall faces; w may be null.
double face_dot(const VectorField& a, const VectorField& b, const VectorField* w);
double cell_dot(std::span<const double> a, std::span<const double> b);
/// Gradient-form seminorm: sum of squared differences including wall terms.
double h1_seminorm_sq(const VectorField& v);
}  // namespace reference

namespace omp {
void divergence(const VectorField& v, ScalarField& out);
void gradient(const ScalarField& p, VectorField& out);
void scaled_gradient(const ScalarField& p, const VectorField& coef, VectorField& out);
void laplacian(const VectorField& v, VectorField& out);
double face_dot(const VectorField& a, const VectorField& b, const VectorField* w);
double cell_dot(std::span<const double> a, std::span<const double> b);
double h1_seminorm_sq(const VectorField& v);
}  // namespace omp

/// Pairwise (cascade) sum in a fixed order.
double pairwise_sum(std::span<const double> values);

}  // namespace rtspectra::kernels
