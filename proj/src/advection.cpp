#include "rtspectra/advection.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rtspectra/errors.hpp"

namespace rtspectra::advection {

namespace {

constexpr std::size_t kParallelThreshold = 4096;

/// Read-only view of a MAC field with the boundary conventions of the
/// stencils: wall-normal faces read as zero, tangential ghosts as -value.
struct FaceView {
    const StaggeredGrid* g;
    std::array<const double*, 3> c{};

    explicit FaceView(const VectorField& v) : g(&v.grid()) {
        for (int a = 0; a < g->dim(); ++a) c[a] = v.comp(a).data();
    }
    double at(int a, std::array<int, 3> i) const {
        if (i[a] <= 0 || i[a] >= g->cells(a)) return 0.0;
        return c[a][g->face_extent(a).index(i[0], i[1], i[2])];
    }
    /// Neighbour of face `i` of component a along axis b != a.
    double tangential(int a, std::array<int, 3> i, int b, int step) const {
        std::array<int, 3> nb = i;
        nb[b] += step;
        if (nb[b] < 0 || nb[b] >= g->cells(b)) return -at(a, i);
        return at(a, nb);
    }
};

double density_cell(const StaggeredGrid& g, const double* rho, const FaceView& u, double dt, int i, int j, int k) {
    const Extent& ce = g.cell_extent();
    const std::array<int, 3> c{i, j, k};
    const double rc = rho[ce.index(i, j, k)];
    double div_flux = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
        std::array<int, 3> lo = c;
        std::array<int, 3> hi = c;
        hi[a] += 1;
        const double ul = u.at(a, lo);
        const double uh = u.at(a, hi);
        double fl = 0.0;
        double fh = 0.0;
        if (ul != 0.0) {
            std::array<int, 3> left = c;
            left[a] -= 1;
            fl = ul > 0.0 ? ul * rho[ce.index(left[0], left[1], left[2])] : ul * rc;
        }
        if (uh != 0.0) {
            std::array<int, 3> right = c;
            right[a] += 1;
            fh = uh > 0.0 ? uh * rc : uh * rho[ce.index(right[0], right[1], right[2])];
        }
        div_flux += (fh - fl) * (1.0 / g.h(a));
    }
    return rc - dt * div_flux;
}

double momentum_face(const StaggeredGrid& g, const FaceView& u, int a, std::array<int, 3> f) {
    if (f[a] <= 0 || f[a] >= g.cells(a)) return 0.0;
    const double ua = u.at(a, f);
    double acc = 0.0;
    for (int b = 0; b < g.dim(); ++b) {
        double vb = 0.0;
        double minus = 0.0;
        double plus = 0.0;
        if (b == a) {
            vb = ua;
            std::array<int, 3> m = f, p = f;
            m[a] -= 1;
            p[a] += 1;
            minus = u.at(a, m);
            plus = u.at(a, p);
        } else {
            // four b-faces around the a-face: cells f[a]-1, f[a] along a; faces f[b], f[b]+1 along b
            std::array<int, 3> q = f;
            double s = 0.0;
            for (int da = -1; da <= 0; ++da)
                for (int db = 0; db <= 1; ++db) {
                    q = f;
                    q[a] += da;
                    q[b] += db;
                    s += u.at(b, q);
                }
            vb = 0.25 * s;
            minus = u.tangential(a, f, b, -1);
            plus = u.tangential(a, f, b, +1);
        }
        const double d = vb > 0.0 ? (ua - minus) : (plus - ua);
        acc += vb * d * (1.0 / g.h(b));
    }
    return acc;
}

void check(const VectorField& u, const ScalarField& s, const char* what) { require_same_grid(u.grid(), s.grid(), what); }

/// Zalesak flux-corrected transport on top of the donor-cell update. The
/// antidiffusive flux is centered minus donor-cell; limiting keeps every cell
/// inside the range of its neighbourhood in rho and in the low-order result.
/// `parallel` only switches the OpenMP pragmas, the arithmetic is identical.
void fct_impl(const ScalarField& rho, const VectorField& u, double dt, ScalarField& out, bool parallel) {
    const auto& g = rho.grid();
    const FaceView fv(u);
    const Extent& ce = g.cell_extent();
    const double* r = rho.values().data();
    const int dim = g.dim();
    const bool par = parallel && ce.size() > kParallelThreshold;

    std::vector<double> low(ce.size());
#pragma omp parallel for collapse(2) schedule(static) if (par)
    for (int k = 0; k < ce.n[2]; ++k)
        for (int j = 0; j < ce.n[1]; ++j)
            for (int i = 0; i < ce.n[0]; ++i) low[ce.index(i, j, k)] = density_cell(g, r, fv, dt, i, j, k);

    // antidiffusive increments per face, in density units: +A to the cell
    // above the face, -A to the cell below
    std::array<std::vector<double>, 3> anti;
    for (int a = 0; a < dim; ++a) {
        const Extent& fe = g.face_extent(a);
        anti[a].assign(fe.size(), 0.0);
        double* A = anti[a].data();
        const double c = dt / g.h(a);
        const std::size_t st = ce.stride(a);
#pragma omp parallel for collapse(2) schedule(static) if (par)
        for (int k = 0; k < fe.n[2]; ++k)
            for (int j = 0; j < fe.n[1]; ++j)
                for (int i = 0; i < fe.n[0]; ++i) {
                    const std::array<int, 3> f{i, j, k};
                    if (f[a] <= 0 || f[a] >= g.cells(a)) continue;
                    const double uf = fv.at(a, f);
                    if (uf == 0.0) continue;
                    const std::size_t hi = ce.index(i, j, k);
                    const double rl = r[hi - st];
                    const double rh = r[hi];
                    const double up = uf > 0.0 ? rl : rh;
                    A[fe.index(i, j, k)] = c * uf * (0.5 * (rl + rh) - up);
                }
    }

    // per-cell limiter ratios
    std::vector<double> rp(ce.size()), rm(ce.size());
#pragma omp parallel for collapse(2) schedule(static) if (par)
    for (int k = 0; k < ce.n[2]; ++k)
        for (int j = 0; j < ce.n[1]; ++j)
            for (int i = 0; i < ce.n[0]; ++i) {
                const std::array<int, 3> c{i, j, k};
                const std::size_t id = ce.index(i, j, k);
                double hi = std::max(r[id], low[id]);
                double lo = std::min(r[id], low[id]);
                double pp = 0.0, pm = 0.0;
                for (int a = 0; a < dim; ++a) {
                    const Extent& fe = g.face_extent(a);
                    const std::size_t st = ce.stride(a);
                    if (c[a] > 0) {
                        hi = std::max({hi, r[id - st], low[id - st]});
                        lo = std::min({lo, r[id - st], low[id - st]});
                    }
                    if (c[a] + 1 < g.cells(a)) {
                        hi = std::max({hi, r[id + st], low[id + st]});
                        lo = std::min({lo, r[id + st], low[id + st]});
                    }
                    std::array<int, 3> up = c;
                    up[a] += 1;
                    const double in_lo = anti[a][fe.index(c[0], c[1], c[2])];
                    const double in_hi = -anti[a][fe.index(up[0], up[1], up[2])];
                    pp += std::max(0.0, in_lo) + std::max(0.0, in_hi);
                    pm += std::max(0.0, -in_lo) + std::max(0.0, -in_hi);
                }
                rp[id] = pp > 0.0 ? std::min(1.0, (hi - low[id]) / pp) : 0.0;
                rm[id] = pm > 0.0 ? std::min(1.0, (low[id] - lo) / pm) : 0.0;
            }

    double* o = out.values().data();
#pragma omp parallel for collapse(2) schedule(static) if (par)
    for (int k = 0; k < ce.n[2]; ++k)
        for (int j = 0; j < ce.n[1]; ++j)
            for (int i = 0; i < ce.n[0]; ++i) {
                const std::array<int, 3> c{i, j, k};
                const std::size_t id = ce.index(i, j, k);
                double v = low[id];
                for (int a = 0; a < dim; ++a) {
                    const Extent& fe = g.face_extent(a);
                    const std::size_t st = ce.stride(a);
                    // lower face: this cell receives +A from the cell below
                    const double al = anti[a][fe.index(c[0], c[1], c[2])];
                    if (al != 0.0) {
                        const double cf = al > 0.0 ? std::min(rp[id], rm[id - st]) : std::min(rm[id], rp[id - st]);
                        v += cf * al;
                    }
                    std::array<int, 3> up = c;
                    up[a] += 1;
                    const double ah = anti[a][fe.index(up[0], up[1], up[2])];
                    if (ah != 0.0) {
                        const double cf = ah > 0.0 ? std::min(rp[id + st], rm[id]) : std::min(rm[id + st], rp[id]);
                        v -= cf * ah;
                    }
                }
                o[id] = v;
            }
}

}  // namespace

namespace reference {

void upwind_density(const ScalarField& rho, const VectorField& u, double dt, ScalarField& out) {
    check(u, rho, "upwind_density");
    check(u, out, "upwind_density");
    const auto& g = rho.grid();
    const FaceView fv(u);
    for (int k = 0; k < g.cells(2); ++k)
        for (int j = 0; j < g.cells(1); ++j)
            for (int i = 0; i < g.cells(0); ++i)
                out.at(i, j, k) = density_cell(g, rho.values().data(), fv, dt, i, j, k);
}

void momentum(const VectorField& u, VectorField& out) {
    require_same_grid(u.grid(), out.grid(), "momentum");
    const auto& g = u.grid();
    const FaceView fv(u);
    for (int a = 0; a < g.dim(); ++a) {
        const Extent& e = g.face_extent(a);
        for (int k = 0; k < e.n[2]; ++k)
            for (int j = 0; j < e.n[1]; ++j)
                for (int i = 0; i < e.n[0]; ++i) out.at(a, i, j, k) = momentum_face(g, fv, a, {i, j, k});
    }
}

void fct_density(const ScalarField& rho, const VectorField& u, double dt, ScalarField& out) {
    check(u, rho, "fct_density");
    check(u, out, "fct_density");
    fct_impl(rho, u, dt, out, false);
}

}  // namespace reference

namespace omp {

void upwind_density(const ScalarField& rho, const VectorField& u, double dt, ScalarField& out) {
    check(u, rho, "upwind_density");
    check(u, out, "upwind_density");
    const auto& g = rho.grid();
    const FaceView fv(u);
    const double* r = rho.values().data();
    double* o = out.values().data();
    const Extent& ce = g.cell_extent();
#pragma omp parallel for collapse(2) schedule(static) if (ce.size() > kParallelThreshold)
    for (int k = 0; k < ce.n[2]; ++k)
        for (int j = 0; j < ce.n[1]; ++j)
            for (int i = 0; i < ce.n[0]; ++i) o[ce.index(i, j, k)] = density_cell(g, r, fv, dt, i, j, k);
}

void momentum(const VectorField& u, VectorField& out) {
    require_same_grid(u.grid(), out.grid(), "momentum");
    const auto& g = u.grid();
    const FaceView fv(u);
    for (int a = 0; a < g.dim(); ++a) {
        const Extent& e = g.face_extent(a);
        double* o = out.comp(a).data();
#pragma omp parallel for collapse(2) schedule(static) if (e.size() > kParallelThreshold)
        for (int k = 0; k < e.n[2]; ++k)
            for (int j = 0; j < e.n[1]; ++j)
                for (int i = 0; i < e.n[0]; ++i) o[e.index(i, j, k)] = momentum_face(g, fv, a, {i, j, k});
    }
}

void fct_density(const ScalarField& rho, const VectorField& u, double dt, ScalarField& out) {
    check(u, rho, "fct_density");
    check(u, out, "fct_density");
    fct_impl(rho, u, dt, out, true);
}

}  // namespace omp

void semi_lagrangian_density(const ScalarField& rho, const VectorField& u, double dt, ScalarField& out) {
    check(u, rho, "semi_lagrangian_density");
    check(u, out, "semi_lagrangian_density");
    const auto& g = rho.grid();
    const FaceView fv(u);
    const Extent& ce = g.cell_extent();
    for (int k = 0; k < ce.n[2]; ++k)
        for (int j = 0; j < ce.n[1]; ++j)
            for (int i = 0; i < ce.n[0]; ++i) {
                const std::array<int, 3> c{i, j, k};
                std::array<int, 3> base{0, 0, 0};
                std::array<double, 3> frac{0.0, 0.0, 0.0};
                for (int a = 0; a < g.dim(); ++a) {
                    std::array<int, 3> hi = c;
                    hi[a] += 1;
                    const double uc = 0.5 * (fv.at(a, c) + fv.at(a, hi));
                    // departure point in cell-index units, clamped to the centers
                    double x = static_cast<double>(c[a]) - dt * uc / g.h(a);
                    x = std::clamp(x, 0.0, static_cast<double>(g.cells(a) - 1));
                    base[a] = std::min(static_cast<int>(std::floor(x)), std::max(g.cells(a) - 2, 0));
                    frac[a] = x - base[a];
                }
                double acc = 0.0;
                const int corners = 1 << g.dim();
                for (int m = 0; m < corners; ++m) {
                    double w = 1.0;
                    std::array<int, 3> p = base;
                    for (int a = 0; a < g.dim(); ++a) {
                        const bool up = (m >> a) & 1;
                        w *= up ? frac[a] : 1.0 - frac[a];
                        p[a] += up ? 1 : 0;
                    }
                    if (w != 0.0) acc += w * rho.at(p[0], p[1], p[2]);
                }
                out.at(i, j, k) = acc;
            }
}

double cfl_rate(const VectorField& u) {
    const auto& g = u.grid();
    const FaceView fv(u);
    double worst = 0.0;
    for (int k = 0; k < g.cells(2); ++k)
        for (int j = 0; j < g.cells(1); ++j)
            for (int i = 0; i < g.cells(0); ++i) {
                const std::array<int, 3> c{i, j, k};
                double r = 0.0;
                for (int a = 0; a < g.dim(); ++a) {
                    std::array<int, 3> hi = c;
                    hi[a] += 1;
                    r += std::max(std::abs(fv.at(a, c)), std::abs(fv.at(a, hi))) / g.h(a);
                }
                worst = std::max(worst, r);
            }
    return worst;
}

}  // namespace rtspectra::advection
