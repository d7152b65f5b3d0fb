#include "rtspectra/solvers.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "rtspectra/errors.hpp"
#include "rtspectra/kernels.hpp"
#include "rtspectra/operators.hpp"

namespace rtspectra {

namespace {

double dot(std::span<const double> a, std::span<const double> b) { return kernels::omp::cell_dot(a, b); }

}  // namespace

CgStats conjugate_gradient(const LinearMap& apply, const LinearMap& precond, std::span<const double> b,
                           std::span<double> x, double tol, int max_iterations) {
    const std::size_t n = b.size();
    CgStats st;
    const double bnorm = std::sqrt(dot(b, b));
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        st.converged = true;
        return st;
    }
    std::vector<double> r(n), z(n), p(n), ap(n);
    apply(x, ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
    double rnorm = std::sqrt(dot(r, r));
    st.relative_residual = rnorm / bnorm;
    if (st.relative_residual <= tol) {
        st.converged = true;
        return st;
    }
    precond(r, z);
    p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= max_iterations; ++it) {
        apply(p, ap);
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) break;
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rnorm = std::sqrt(dot(r, r));
        st.iterations = it;
        st.relative_residual = rnorm / bnorm;
        if (st.relative_residual <= tol) {
            st.converged = true;
            return st;
        }
        precond(r, z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    return st;
}

// ---------------------------------------------------------------------------

PressurePoisson::PressurePoisson(const StaggeredGrid& grid, double tol, int max_iterations)
    : grid_(grid), fast_(SeparableSolver::neumann_cells(grid)), tol_(tol), max_iterations_(max_iterations) {}

void PressurePoisson::set_coefficient(std::optional<VectorField> beta) {
    beta_ = std::move(beta);
    beta_mean_ = 1.0;
    if (beta_) {
        require_same_grid(grid_, beta_->grid(), "pressure poisson coefficient");
        // mean over interior faces
        double s = 0.0;
        std::size_t count = 0;
        for (int a = 0; a < grid_.dim(); ++a) {
            const auto& e = grid_.face_extent(a);
            for (int k = 0; k < e.n[2]; ++k)
                for (int j = 0; j < e.n[1]; ++j)
                    for (int i = 0; i < e.n[0]; ++i) {
                        const std::array<int, 3> idx{i, j, k};
                        if (idx[a] == 0 || idx[a] == grid_.cells(a)) continue;
                        s += beta_->at(a, i, j, k);
                        ++count;
                    }
        }
        beta_mean_ = s / static_cast<double>(count);
    }
}

VectorField PressurePoisson::flux(const ScalarField& phi) const {
    VectorField out(grid_);
    if (beta_)
        kernels::omp::scaled_gradient(phi, *beta_, out);
    else
        kernels::omp::gradient(phi, out);
    return out;
}

ScalarField PressurePoisson::solve(const ScalarField& rhs, CgStats* stats) const {
    require_same_grid(grid_, rhs.grid(), "pressure poisson");
    // the operator's range is the zero-mean subspace
    std::vector<double> b(rhs.values().begin(), rhs.values().end());
    const double mean = kernels::pairwise_sum(b) / static_cast<double>(b.size());
    for (double& v : b) v = -(v - mean);

    ScalarField tmp(grid_);
    const LinearMap apply = [&](std::span<const double> in, std::span<double> out) {
        std::copy(in.begin(), in.end(), tmp.values().begin());
        const VectorField f = flux(tmp);
        ScalarField d(grid_);
        kernels::omp::divergence(f, d);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = -d[i];
    };
    const LinearMap precond = [&](std::span<const double> in, std::span<double> out) {
        fast_.solve(0.0, -beta_mean_, in, out);
    };
    ScalarField phi(grid_);
    const CgStats st = conjugate_gradient(apply, precond, b, phi.values(), tol_, max_iterations_);
    if (stats) *stats = st;
    if (!st.converged) {
        std::ostringstream os;
        os << "pressure poisson: no convergence after " << st.iterations << " iterations (relative residual "
           << st.relative_residual << ", tolerance " << tol_ << ")";
        throw SolverError(os.str(), st.relative_residual);
    }
    const double pm = phi.mean();
    for (double& v : phi.values()) v -= pm;
    return phi;
}

// ---------------------------------------------------------------------------

ViscousSolver::ViscousSolver(const StaggeredGrid& grid, double tol, int max_iterations)
    : grid_(grid), tol_(tol), max_iterations_(max_iterations) {
    for (int a = 0; a < grid.dim(); ++a) fast_[a] = SeparableSolver::velocity_component(grid, a);
}

VectorField ViscousSolver::solve(const VectorField& face_weight, double kappa, const VectorField& rhs,
                                 const VectorField* initial_guess, CgStats* stats) const {
    require_same_grid(grid_, rhs.grid(), "viscous solve");
    require_same_grid(grid_, face_weight.grid(), "viscous solve weight");
    VectorField b = rhs;
    b.enforce_no_slip();
    double wsum = 0.0;
    std::size_t count = 0;
    for (double w : face_weight.flat()) {
        wsum += w;
        ++count;
    }
    const double wmean = wsum / static_cast<double>(count);

    VectorField tmp(grid_);
    const LinearMap apply = [&](std::span<const double> in, std::span<double> out) {
        std::copy(in.begin(), in.end(), tmp.flat().begin());
        tmp.enforce_no_slip();
        VectorField lap(grid_);
        kernels::omp::laplacian(tmp, lap);
        const auto w = face_weight.flat();
        const auto t = tmp.flat();
        const auto l = lap.flat();
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = w[i] * t[i] - kappa * l[i];
        // wall faces carry no unknowns
        std::copy(out.begin(), out.end(), tmp.flat().begin());
        tmp.enforce_no_slip();
        std::copy(tmp.flat().begin(), tmp.flat().end(), out.begin());
    };
    const LinearMap precond = [&](std::span<const double> in, std::span<double> out) {
        for (int a = 0; a < grid_.dim(); ++a) {
            const std::size_t off = tmp.offset(a);
            const std::size_t len = grid_.face_extent(a).size();
            fast_[a].solve(wmean, -kappa, in.subspan(off, len), out.subspan(off, len));
        }
    };
    VectorField x = initial_guess ? *initial_guess : VectorField(grid_);
    x.enforce_no_slip();
    const CgStats st = conjugate_gradient(apply, precond, b.flat(), x.flat(), tol_, max_iterations_);
    if (stats) *stats = st;
    if (!st.converged) {
        std::ostringstream os;
        os << "viscous solve: no convergence after " << st.iterations << " iterations (relative residual "
           << st.relative_residual << ")";
        throw SolverError(os.str(), st.relative_residual);
    }
    return x;
}

}  // namespace rtspectra
