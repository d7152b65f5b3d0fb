#include "rtspectra/operators.hpp"

#include <cmath>

#include "rtspectra/errors.hpp"
#include "rtspectra/kernels.hpp"

namespace rtspectra {

ScalarField discrete_divergence(const VectorField& v) {
    ScalarField out(v.grid());
    kernels::omp::divergence(v, out);
    return out;
}

VectorField discrete_gradient(const ScalarField& p) {
    VectorField out(p.grid());
    kernels::omp::gradient(p, out);
    return out;
}

VectorField discrete_laplacian(const VectorField& v) {
    VectorField out(v.grid());
    kernels::omp::laplacian(v, out);
    return out;
}

VectorField face_average(const ScalarField& w) {
    const auto& g = w.grid();
    VectorField out(g);
    const auto& ce = g.cell_extent();
    for (int a = 0; a < g.dim(); ++a) {
        const auto& e = g.face_extent(a);
        const std::size_t st = ce.stride(a);
        const int na = g.cells(a);
        for (int k = 0; k < e.n[2]; ++k)
            for (int j = 0; j < e.n[1]; ++j)
                for (int i = 0; i < e.n[0]; ++i) {
                    const std::array<int, 3> idx{i, j, k};
                    double val = 0.0;
                    if (idx[a] == 0) {
                        val = w[ce.index(i, j, k)];
                    } else if (idx[a] == na) {
                        std::array<int, 3> lo = idx;
                        lo[a] -= 1;
                        val = w[ce.index(lo[0], lo[1], lo[2])];
                    } else {
                        const std::size_t c = ce.index(i, j, k);
                        val = 0.5 * (w[c] + w[c - st]);
                    }
                    out.at(a, i, j, k) = val;
                }
    }
    return out;
}

double weighted_inner(const VectorField& a, const VectorField& b, const ScalarField& w) {
    require_same_grid(a.grid(), w.grid(), "weighted_inner");
    if (w.min() <= 0.0) throw PreconditionError("weighted_inner: weight must be positive");
    const VectorField fw = face_average(w);
    return kernels::omp::face_dot(a, b, &fw);
}

double face_weighted_inner(const VectorField& a, const VectorField& b, const VectorField& face_w) {
    return kernels::omp::face_dot(a, b, &face_w);
}

double unweighted_inner(const VectorField& a, const VectorField& b) { return kernels::omp::face_dot(a, b, nullptr); }

double cell_inner(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid(), b.grid(), "cell_inner");
    return kernels::omp::cell_dot(a.values(), b.values()) * a.grid().cell_volume();
}

double h1_seminorm_sq(const VectorField& v) { return kernels::omp::h1_seminorm_sq(v); }

ScalarField gravity_to_cells(const VectorField& v) {
    const auto& g = v.grid();
    const int ga = g.gravity_axis();
    const auto& ce = g.cell_extent();
    const auto& fe = g.face_extent(ga);
    const std::size_t st = fe.stride(ga);
    const auto comp = v.comp(ga);
    ScalarField out(g);
    for (int k = 0; k < ce.n[2]; ++k)
        for (int j = 0; j < ce.n[1]; ++j)
            for (int i = 0; i < ce.n[0]; ++i) {
                const std::size_t f = fe.index(i, j, k);
                out.at(i, j, k) = 0.5 * (comp[f] + comp[f + st]);
            }
    return out;
}

VectorField cells_to_gravity(const ScalarField& s) {
    const auto& g = s.grid();
    const int ga = g.gravity_axis();
    const auto& ce = g.cell_extent();
    const auto& fe = g.face_extent(ga);
    const std::size_t st = ce.stride(ga);
    const int na = g.cells(ga);
    VectorField out(g);
    auto comp = out.comp(ga);
    for (int k = 0; k < fe.n[2]; ++k)
        for (int j = 0; j < fe.n[1]; ++j)
            for (int i = 0; i < fe.n[0]; ++i) {
                const std::array<int, 3> idx{i, j, k};
                if (idx[ga] == 0 || idx[ga] == na) continue;
                const std::size_t c = ce.index(i, j, k);
                comp[fe.index(i, j, k)] = 0.5 * (s[c] + s[c - st]);
            }
    return out;
}

double discrete_h2_norm(const VectorField& v) {
    const VectorField lap = discrete_laplacian(v);
    const double l2 = unweighted_inner(v, v);
    return std::sqrt(l2 + h1_seminorm_sq(v) + unweighted_inner(lap, lap));
}

}  // namespace rtspectra
