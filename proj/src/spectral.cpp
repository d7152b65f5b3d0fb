#include "rtspectra/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rtspectra {

AxisBasis AxisBasis::make(BasisKind kind, int cells, double h) {
    AxisBasis b;
    const double pi = std::numbers::pi;
    const int n = cells;
    b.m = (kind == BasisKind::DirichletFaces) ? n - 1 : n;
    b.offset = (kind == BasisKind::DirichletFaces) ? 1 : 0;
    b.q.assign(static_cast<std::size_t>(b.m) * b.m, 0.0);
    b.lambda.assign(static_cast<std::size_t>(b.m), 0.0);
    for (int k = 0; k < b.m; ++k) {
        double theta = 0.0;
        switch (kind) {
            case BasisKind::NeumannCells: theta = pi * k / n; break;
            case BasisKind::DirichletFaces: theta = pi * (k + 1) / n; break;
            case BasisKind::ReflectedCells: theta = pi * (k + 1) / n; break;
        }
        b.lambda[k] = -(2.0 - 2.0 * std::cos(theta)) / (h * h);
        double norm = 0.0;
        for (int j = 0; j < b.m; ++j) {
            double val = 0.0;
            switch (kind) {
                case BasisKind::NeumannCells: val = std::cos(theta * (j + 0.5)); break;
                case BasisKind::DirichletFaces: val = std::sin(theta * (j + 1)); break;
                case BasisKind::ReflectedCells: val = std::sin(theta * (j + 0.5)); break;
            }
            b.q[static_cast<std::size_t>(j) * b.m + k] = val;
            norm += val * val;
        }
        norm = 1.0 / std::sqrt(norm);
        for (int j = 0; j < b.m; ++j) b.q[static_cast<std::size_t>(j) * b.m + k] *= norm;
    }
    return b;
}

AxisBasis AxisBasis::trivial() {
    AxisBasis b;
    b.q = {1.0};
    b.lambda = {0.0};
    return b;
}

SeparableSolver::SeparableSolver(Extent extent, std::array<AxisBasis, 3> axes)
    : extent_(extent), axes_(std::move(axes)) {}

SeparableSolver SeparableSolver::neumann_cells(const StaggeredGrid& g) {
    std::array<AxisBasis, 3> axes{AxisBasis::trivial(), AxisBasis::trivial(), AxisBasis::trivial()};
    for (int a = 0; a < g.dim(); ++a) axes[a] = AxisBasis::make(BasisKind::NeumannCells, g.cells(a), g.h(a));
    return SeparableSolver(g.cell_extent(), std::move(axes));
}

SeparableSolver SeparableSolver::velocity_component(const StaggeredGrid& g, int a) {
    std::array<AxisBasis, 3> axes{AxisBasis::trivial(), AxisBasis::trivial(), AxisBasis::trivial()};
    for (int b = 0; b < g.dim(); ++b) {
        axes[b] = AxisBasis::make(b == a ? BasisKind::DirichletFaces : BasisKind::ReflectedCells, g.cells(b), g.h(b));
    }
    return SeparableSolver(g.face_extent(a), std::move(axes));
}

void SeparableSolver::transform(std::vector<double>& work, int axis, bool forward) const {
    const AxisBasis& b = axes_[axis];
    if (b.m == 1 && b.offset == 0 && extent_.n[axis] == 1) return;
    const std::size_t st = extent_.stride(axis);
    std::array<int, 3> lines = extent_.n;
    lines[axis] = 1;
    std::vector<double> in(static_cast<std::size_t>(b.m));
    std::vector<double> out(static_cast<std::size_t>(b.m));
    for (int k = 0; k < lines[2]; ++k)
        for (int j = 0; j < lines[1]; ++j)
            for (int i = 0; i < lines[0]; ++i) {
                const std::size_t base = extent_.index(i, j, k) + st * static_cast<std::size_t>(b.offset);
                for (int p = 0; p < b.m; ++p) in[p] = work[base + st * p];
                if (forward) {
                    // coefficients = Q^T x
                    for (int kk = 0; kk < b.m; ++kk) out[kk] = 0.0;
                    for (int p = 0; p < b.m; ++p) {
                        const double xp = in[p];
                        const double* row = &b.q[static_cast<std::size_t>(p) * b.m];
                        for (int kk = 0; kk < b.m; ++kk) out[kk] += row[kk] * xp;
                    }
                } else {
                    for (int p = 0; p < b.m; ++p) {
                        const double* row = &b.q[static_cast<std::size_t>(p) * b.m];
                        double s = 0.0;
                        for (int kk = 0; kk < b.m; ++kk) s += row[kk] * in[kk];
                        out[p] = s;
                    }
                }
                for (int p = 0; p < b.m; ++p) work[base + st * p] = out[p];
            }
}

void SeparableSolver::solve(double c, double kappa, std::span<const double> r, std::span<double> x) const {
    std::vector<double> work(r.begin(), r.end());
    // zero entries outside the supports so they cannot leak into the result
    for (int k = 0; k < extent_.n[2]; ++k)
        for (int j = 0; j < extent_.n[1]; ++j)
            for (int i = 0; i < extent_.n[0]; ++i) {
                const std::array<int, 3> idx{i, j, k};
                bool inside = true;
                for (int a = 0; a < 3; ++a)
                    if (idx[a] < axes_[a].offset || idx[a] >= axes_[a].offset + axes_[a].m) inside = false;
                if (!inside) work[extent_.index(i, j, k)] = 0.0;
            }
    for (int a = 0; a < 3; ++a) transform(work, a, true);
    const double scale_ref = std::abs(c) + std::abs(kappa) * lambda_max_magnitude();
    for (int k = 0; k < axes_[2].m; ++k)
        for (int j = 0; j < axes_[1].m; ++j)
            for (int i = 0; i < axes_[0].m; ++i) {
                const double lam = axes_[0].lambda[i] + axes_[1].lambda[j] + axes_[2].lambda[k];
                const double d = c + kappa * lam;
                const std::size_t n =
                    extent_.index(i + axes_[0].offset, j + axes_[1].offset, k + axes_[2].offset);
                work[n] = (std::abs(d) <= 1e-13 * scale_ref) ? 0.0 : work[n] / d;
            }
    for (int a = 0; a < 3; ++a) transform(work, a, false);
    std::copy(work.begin(), work.end(), x.begin());
}

double SeparableSolver::lambda_max_magnitude() const {
    double m = 0.0;
    for (int a = 0; a < 3; ++a) {
        double largest = 0.0;
        for (double l : axes_[a].lambda) largest = std::max(largest, std::abs(l));
        m += largest;
    }
    return m;
}

}  // namespace rtspectra
