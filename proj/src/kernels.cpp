#include "rtspectra/kernels.hpp"

#include <vector>

#include "rtspectra/errors.hpp"

namespace rtspectra::kernels {

double pairwise_sum(std::span<const double> values) {
    constexpr std::size_t kLeaf = 32;
    if (values.size() <= kLeaf) {
        double s = 0.0;
        for (double x : values) s += x;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace {

constexpr std::size_t kParallelThreshold = 4096;

void check_conform(const VectorField& v, const ScalarField& s, const char* what) {
    require_same_grid(v.grid(), s.grid(), what);
}

}  // namespace

// ---------------------------------------------------------------------------
// reference
// ---------------------------------------------------------------------------
namespace reference {

namespace {

/// Face value with wall-normal faces read as zero.
double face_value(const VectorField& v, int a, std::array<int, 3> idx) {
    const auto& g = v.grid();
    if (idx[a] <= 0 || idx[a] >= g.cells(a)) return 0.0;
    return v.at(a, idx[0], idx[1], idx[2]);
}

/// Neighbour along tangential axis b, with linear-reflection ghost beyond walls.
double tangential_neighbor(const VectorField& v, int a, std::array<int, 3> idx, int b, int step) {
    const auto& g = v.grid();
    std::array<int, 3> nb = idx;
    nb[b] += step;
    if (nb[b] < 0 || nb[b] >= g.cells(b)) return -face_value(v, a, idx);
    return face_value(v, a, nb);
}

}  // namespace

void divergence(const VectorField& v, ScalarField& out) {
    check_conform(v, out, "divergence");
    const auto& g = v.grid();
    for (int k = 0; k < g.cells(2); ++k)
        for (int j = 0; j < g.cells(1); ++j)
            for (int i = 0; i < g.cells(0); ++i) {
                double d = 0.0;
                for (int a = 0; a < g.dim(); ++a) {
                    std::array<int, 3> lo{i, j, k};
                    std::array<int, 3> hi{i, j, k};
                    hi[a] += 1;
                    d += (v.at(a, hi[0], hi[1], hi[2]) - v.at(a, lo[0], lo[1], lo[2])) * (1.0 / g.h(a));
                }
                out.at(i, j, k) = d;
            }
}

void gradient(const ScalarField& p, VectorField& out) {
    check_conform(out, p, "gradient");
    const auto& g = p.grid();
    for (int a = 0; a < g.dim(); ++a) {
        const auto& e = g.face_extent(a);
        for (int k = 0; k < e.n[2]; ++k)
            for (int j = 0; j < e.n[1]; ++j)
                for (int i = 0; i < e.n[0]; ++i) {
                    std::array<int, 3> idx{i, j, k};
                    if (idx[a] == 0 || idx[a] == g.cells(a)) {
                        out.at(a, i, j, k) = 0.0;
                        continue;
                    }
                    std::array<int, 3> lo = idx;
                    lo[a] -= 1;
                    out.at(a, i, j, k) = (p.at(i, j, k) - p.at(lo[0], lo[1], lo[2])) * (1.0 / g.h(a));
                }
    }
}

void scaled_gradient(const ScalarField& p, const VectorField& coef, VectorField& out) {
    gradient(p, out);
    for (std::size_t n = 0; n < out.flat_size(); ++n) out.flat()[n] *= coef.flat()[n];
}

void laplacian(const VectorField& v, VectorField& out) {
    require_same_grid(v.grid(), out.grid(), "laplacian");
    const auto& g = v.grid();
    for (int a = 0; a < g.dim(); ++a) {
        const auto& e = g.face_extent(a);
        for (int k = 0; k < e.n[2]; ++k)
            for (int j = 0; j < e.n[1]; ++j)
                for (int i = 0; i < e.n[0]; ++i) {
                    std::array<int, 3> idx{i, j, k};
                    if (idx[a] == 0 || idx[a] == g.cells(a)) {
                        out.at(a, i, j, k) = 0.0;
                        continue;
                    }
                    const double c = face_value(v, a, idx);
                    double acc = 0.0;
                    for (int b = 0; b < g.dim(); ++b) {
                        const double inv_h2 = 1.0 / (g.h(b) * g.h(b));
                        double lo = 0.0;
                        double hi = 0.0;
                        if (b == a) {
                            std::array<int, 3> m = idx;
                            std::array<int, 3> p = idx;
                            m[a] -= 1;
                            p[a] += 1;
                            lo = face_value(v, a, m);
                            hi = face_value(v, a, p);
                        } else {
                            lo = tangential_neighbor(v, a, idx, b, -1);
                            hi = tangential_neighbor(v, a, idx, b, +1);
                        }
                        acc += (hi - 2.0 * c + lo) * inv_h2;
                    }
                    out.at(a, i, j, k) = acc;
                }
    }
}

double face_dot(const VectorField& a, const VectorField& b, const VectorField* w) {
    require_same_grid(a.grid(), b.grid(), "face_dot");
    if (w) require_same_grid(a.grid(), w->grid(), "face_dot weight");
    const auto& g = a.grid();
    double s = 0.0;
    for (int c = 0; c < g.dim(); ++c) {
        const auto& e = g.face_extent(c);
        for (int k = 0; k < e.n[2]; ++k)
            for (int j = 0; j < e.n[1]; ++j)
                for (int i = 0; i < e.n[0]; ++i) {
                    std::array<int, 3> idx{i, j, k};
                    const double trap = (idx[c] == 0 || idx[c] == g.cells(c)) ? 0.5 : 1.0;
                    const double ww = w ? w->at(c, i, j, k) : 1.0;
                    s += trap * ww * a.at(c, i, j, k) * b.at(c, i, j, k);
                }
    }
    return s * g.cell_volume();
}

double cell_dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * b[n];
    return s;
}

double h1_seminorm_sq(const VectorField& v) {
    const auto& g = v.grid();
    double s = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
        const auto& e = g.face_extent(a);
        for (int k = 0; k < e.n[2]; ++k)
            for (int j = 0; j < e.n[1]; ++j)
                for (int i = 0; i < e.n[0]; ++i) {
                    std::array<int, 3> idx{i, j, k};
                    const double c = face_value(v, a, idx);
                    for (int b = 0; b < g.dim(); ++b) {
                        const double inv_h2 = 1.0 / (g.h(b) * g.h(b));
                        if (b == a) {
                            // difference to the next face along a (faces 0..n-1 own one edge each)
                            if (idx[a] >= g.cells(a)) continue;
                            std::array<int, 3> p = idx;
                            p[a] += 1;
                            const double d = face_value(v, a, p) - c;
                            s += d * d * inv_h2;
                        } else {
                            if (idx[a] == 0 || idx[a] == g.cells(a)) continue;
                            if (idx[b] + 1 < g.cells(b)) {
                                std::array<int, 3> p = idx;
                                p[b] += 1;
                                const double d = face_value(v, a, p) - c;
                                s += d * d * inv_h2;
                            }
                            if (idx[b] == 0) s += 2.0 * c * c * inv_h2;
                            if (idx[b] == g.cells(b) - 1) s += 2.0 * c * c * inv_h2;
                        }
                    }
                }
    }
    return s * g.cell_volume();
}

}  // namespace reference

// ---------------------------------------------------------------------------
// omp
// ---------------------------------------------------------------------------
namespace omp {

void divergence(const VectorField& v, ScalarField& out) {
    check_conform(v, out, "divergence");
    const auto& g = v.grid();
    const auto& ce = g.cell_extent();
    const int dim = g.dim();
    const int n0 = ce.n[0], n1 = ce.n[1], n2 = ce.n[2];
    std::array<const double*, 3> comp{};
    std::array<double, 3> inv_h{};
    for (int a = 0; a < dim; ++a) {
        comp[a] = v.comp(a).data();
        inv_h[a] = 1.0 / g.h(a);
    }
    double* o = out.values().data();
#pragma omp parallel for collapse(2) schedule(static) if (ce.size() > kParallelThreshold)
    for (int k = 0; k < n2; ++k)
        for (int j = 0; j < n1; ++j) {
            double* orow = o + ce.index(0, j, k);
            {
                const auto& e = g.face_extent(0);
                const double* r = comp[0] + e.index(0, j, k);
                for (int i = 0; i < n0; ++i) orow[i] = (r[i + 1] - r[i]) * inv_h[0];
            }
            for (int a = 1; a < dim; ++a) {
                const auto& e = g.face_extent(a);
                const std::size_t st = e.stride(a);
                const double* r = comp[a] + e.index(0, j, k);
                for (int i = 0; i < n0; ++i) orow[i] += (r[i + st] - r[i]) * inv_h[a];
            }
        }
}

void scaled_gradient(const ScalarField& p, const VectorField& coef, VectorField& out) {
    check_conform(out, p, "gradient");
    const auto& g = p.grid();
    const auto& ce = g.cell_extent();
    const double* pv = p.values().data();
    const bool scaled = coef.flat_size() == out.flat_size();
    for (int a = 0; a < g.dim(); ++a) {
        const auto& e = g.face_extent(a);
        double* o = out.comp(a).data();
        const double* cf = scaled ? coef.comp(a).data() : nullptr;
        const double inv_h = 1.0 / g.h(a);
        const int na = g.cells(a);
        const std::size_t cst = ce.stride(a);
#pragma omp parallel for collapse(2) schedule(static) if (e.size() > kParallelThreshold)
        for (int k = 0; k < e.n[2]; ++k)
            for (int j = 0; j < e.n[1]; ++j) {
                const std::size_t fo = e.index(0, j, k);
                for (int i = 0; i < e.n[0]; ++i) {
                    const int m = (a == 0) ? i : (a == 1 ? j : k);
                    if (m == 0 || m == na) {
                        o[fo + i] = 0.0;
                        continue;
                    }
                    const std::size_t c = ce.index(i, j, k);
                    double val = (pv[c] - pv[c - cst]) * inv_h;
                    if (cf) val *= cf[fo + i];
                    o[fo + i] = val;
                }
            }
    }
}

void gradient(const ScalarField& p, VectorField& out) {
    static const VectorField kNone;
    scaled_gradient(p, kNone, out);
}

void laplacian(const VectorField& v, VectorField& out) {
    require_same_grid(v.grid(), out.grid(), "laplacian");
    const auto& g = v.grid();
    const int dim = g.dim();
    for (int a = 0; a < dim; ++a) {
        const auto& e = g.face_extent(a);
        const double* in = v.comp(a).data();
        double* o = out.comp(a).data();
        const int na = g.cells(a);
        std::array<double, 3> inv_h2{};
        for (int b = 0; b < dim; ++b) inv_h2[b] = 1.0 / (g.h(b) * g.h(b));
#pragma omp parallel for collapse(2) schedule(static) if (e.size() > kParallelThreshold)
        for (int k = 0; k < e.n[2]; ++k)
            for (int j = 0; j < e.n[1]; ++j) {
                const std::size_t ro = e.index(0, j, k);
                const std::array<int, 3> jk{0, j, k};
                for (int i = 0; i < e.n[0]; ++i) {
                    const std::array<int, 3> idx{i, jk[1], jk[2]};
                    if (idx[a] == 0 || idx[a] == na) {
                        o[ro + i] = 0.0;
                        continue;
                    }
                    const std::size_t f = ro + i;
                    const double c = in[f];
                    double acc = 0.0;
                    for (int b = 0; b < dim; ++b) {
                        const std::size_t st = e.stride(b);
                        double lo = 0.0;
                        double hi = 0.0;
                        if (b == a) {
                            lo = (idx[a] - 1 == 0) ? 0.0 : in[f - st];
                            hi = (idx[a] + 1 == na) ? 0.0 : in[f + st];
                        } else {
                            lo = (idx[b] == 0) ? -c : in[f - st];
                            hi = (idx[b] == g.cells(b) - 1) ? -c : in[f + st];
                        }
                        acc += (hi - 2.0 * c + lo) * inv_h2[b];
                    }
                    o[f] = acc;
                }
            }
    }
}

double face_dot(const VectorField& a, const VectorField& b, const VectorField* w) {
    require_same_grid(a.grid(), b.grid(), "face_dot");
    if (w) require_same_grid(a.grid(), w->grid(), "face_dot weight");
    const auto& g = a.grid();
    std::vector<double> partial;
    for (int c = 0; c < g.dim(); ++c) {
        const auto& e = g.face_extent(c);
        const int rows = e.n[1] * e.n[2];
        const std::size_t base = partial.size();
        partial.resize(base + static_cast<std::size_t>(rows));
        const double* pa = a.comp(c).data();
        const double* pb = b.comp(c).data();
        const double* pw = w ? w->comp(c).data() : nullptr;
        const int nc = g.cells(c);
#pragma omp parallel for schedule(static) if (e.size() > kParallelThreshold)
        for (int r = 0; r < rows; ++r) {
            const int j = r % e.n[1];
            const int k = r / e.n[1];
            const std::size_t ro = e.index(0, j, k);
            const double row_trap = (c == 1 && (j == 0 || j == nc)) || (c == 2 && (k == 0 || k == nc)) ? 0.5 : 1.0;
            double s = 0.0;
            for (int i = 0; i < e.n[0]; ++i) {
                const double trap = (c == 0 && (i == 0 || i == nc)) ? 0.5 : 1.0;
                const double ww = pw ? pw[ro + i] : 1.0;
                s += trap * ww * pa[ro + i] * pb[ro + i];
            }
            partial[base + static_cast<std::size_t>(r)] = row_trap * s;
        }
    }
    return pairwise_sum(partial) * g.cell_volume();
}

double cell_dot(std::span<const double> a, std::span<const double> b) {
    constexpr std::size_t kBlock = 256;
    const std::size_t blocks = (a.size() + kBlock - 1) / kBlock;
    std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static) if (a.size() > kParallelThreshold)
    for (std::size_t bl = 0; bl < blocks; ++bl) {
        const std::size_t lo = bl * kBlock;
        const std::size_t hi = std::min(a.size(), lo + kBlock);
        double s = 0.0;
        for (std::size_t n = lo; n < hi; ++n) s += a[n] * b[n];
        partial[bl] = s;
    }
    return pairwise_sum(partial);
}

double h1_seminorm_sq(const VectorField& v) {
    const auto& g = v.grid();
    const int dim = g.dim();
    std::vector<double> partial;
    for (int a = 0; a < dim; ++a) {
        const auto& e = g.face_extent(a);
        const double* in = v.comp(a).data();
        const int rows = e.n[1] * e.n[2];
        const std::size_t base = partial.size();
        partial.resize(base + static_cast<std::size_t>(rows));
        const int na = g.cells(a);
        std::array<double, 3> inv_h2{};
        for (int b = 0; b < dim; ++b) inv_h2[b] = 1.0 / (g.h(b) * g.h(b));
#pragma omp parallel for schedule(static) if (e.size() > kParallelThreshold)
        for (int r = 0; r < rows; ++r) {
            const int j = r % e.n[1];
            const int k = r / e.n[1];
            const std::size_t ro = e.index(0, j, k);
            double s = 0.0;
            for (int i = 0; i < e.n[0]; ++i) {
                const std::array<int, 3> idx{i, j, k};
                const std::size_t f = ro + i;
                const bool wall = idx[a] == 0 || idx[a] == na;
                const double c = wall ? 0.0 : in[f];
                for (int b = 0; b < dim; ++b) {
                    const std::size_t st = e.stride(b);
                    if (b == a) {
                        if (idx[a] >= na) continue;
                        const double nxt = (idx[a] + 1 == na) ? 0.0 : in[f + st];
                        const double d = nxt - c;
                        s += d * d * inv_h2[b];
                    } else {
                        if (wall) continue;
                        if (idx[b] + 1 < g.cells(b)) {
                            const double d = in[f + st] - c;
                            s += d * d * inv_h2[b];
                        }
                        if (idx[b] == 0) s += 2.0 * c * c * inv_h2[b];
                        if (idx[b] == g.cells(b) - 1) s += 2.0 * c * c * inv_h2[b];
                    }
                }
            }
            partial[base + static_cast<std::size_t>(r)] = s;
        }
    }
    return pairwise_sum(partial) * g.cell_volume();
}

}  // namespace omp

}  // namespace rtspectra::kernels
