/// @file spectral.hpp
/// @brief Separable eigen-bases of the 1D second-difference operators and a
/// direct solver for constant-coefficient (c + kappa * Laplacian) problems.
///
/// Each boundary treatment of the MAC stencils is diagonalised by a real
/// trigonometric basis:
///   - cell centers, homogeneous Neumann        -> DCT-II
///   - interior faces, Dirichlet at both walls  -> DST-I
///   - cell-centered tangential velocity with
///     reflected ghosts                        -> DST-II
/// The bases are stored as dense orthonormal matrices; grids here are small
/// enough that an O(n) per-line matvec is cheaper than planning FFTs.
#pragma once

#include <array>
#include <span>
#include <vector>

#include "rtspectra/grid.hpp"

namespace rtspectra {

enum class BasisKind { NeumannCells, DirichletFaces, ReflectedCells };

struct AxisBasis {
    int offset = 0;              ///< first array entry covered by the basis
    int m = 1;                   ///< number of entries covered
    std::vector<double> q;       ///< m x m, column k is mode k (row-major q[j*m+k])
    std::vector<double> lambda;  ///< eigenvalues of the 1D second difference (<= 0)

    static AxisBasis make(BasisKind kind, int cells, double h);
    static AxisBasis trivial();
};

class SeparableSolver {
public:
    SeparableSolver() = default;
    SeparableSolver(Extent extent, std::array<AxisBasis, 3> axes);

    /// Pressure-type solver on cell centers with Neumann walls.
    static SeparableSolver neumann_cells(const StaggeredGrid& g);
    /// Solver for velocity component `a` with the no-slip closures.
    static SeparableSolver velocity_component(const StaggeredGrid& g, int a);

    /// Solves (c + kappa * L) x = r in the basis where L is diagonal. Modes
    /// with a vanishing denominator (the Neumann constant) are set to zero.
    /// Entries outside the basis support are written as zero.
    void solve(double c, double kappa, std::span<const double> r, std::span<double> x) const;

    /// Largest |eigenvalue| of L (the spectral radius of the stencil).
    double lambda_max_magnitude() const;

private:
    void transform(std::vector<double>& work, int axis, bool forward) const;

    Extent extent_{};
    std::array<AxisBasis, 3> axes_{};
};

}  // namespace rtspectra
