/// @file lobpcg.hpp
/// @brief Block preconditioned eigensolver for the largest eigenvalues of a
/// symmetric pencil A x = lambda M x restricted to the range of a projector.
///
/// Only matrix-vector products are needed. A and M must be symmetric in the
/// Euclidean inner product of the flat vector, M positive definite on the
/// range of `project`, and `project` an orthogonal projector. The iteration
/// keeps every basis vector in that range.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace rtspectra {

struct EigenProblem {
    using Apply = std::function<void(std::span<const double>, std::span<double>)>;
    using InPlace = std::function<void(std::span<double>)>;

    std::size_t size = 0;
    Apply apply_a;
    Apply apply_m;
    InPlace project;  ///< optional
    Apply precond;    ///< optional, symmetric positive definite
    double norm_a = 1.0;  ///< operator-norm estimates for the residual test
    double norm_m = 1.0;
};

struct LobpcgOptions {
    int block = 2;
    double tol = 1e-10;  ///< ||P(Ax - l Mx)|| <= tol (||A|| + |l| ||M||) ||x||
    int max_iterations = 1000;
    std::uint64_t seed = 1;
    int reproject_every = 20;
};

struct LobpcgResult {
    std::vector<double> values;                ///< descending
    std::vector<std::vector<double>> vectors;  ///< M-orthonormal
    std::vector<double> residuals;             ///< relative, per value
    int iterations = 0;
    bool converged = false;
};

/// Computes the `block` largest eigenpairs; convergence is judged on the
/// leading pair. `initial` columns (if any) seed the block; remaining
/// columns are seeded pseudo-random vectors. Throws SolverError when the
/// leading residual stays above tolerance after max_iterations.
LobpcgResult lobpcg(const EigenProblem& problem, const LobpcgOptions& options,
                    const std::vector<std::vector<double>>& initial = {});

}  // namespace rtspectra
