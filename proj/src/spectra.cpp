#include "rtspectra/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "rtspectra/errors.hpp"
#include "rtspectra/lobpcg.hpp"
#include "rtspectra/operators.hpp"

namespace rtspectra {

namespace {

double max_of(std::span<const double> s) { return *std::max_element(s.begin(), s.end()); }

void copy_in(std::span<const double> src, VectorField& dst) { std::copy(src.begin(), src.end(), dst.flat().begin()); }

void copy_out(const VectorField& src, std::span<double> dst) {
    std::copy(src.flat().begin(), src.flat().end(), dst.begin());
}

double bump_profile(double t) {
    if (std::abs(t) >= 1.0) return 0.0;
    const double u = 1.0 - t * t;
    return u * u * u;
}

}  // namespace

// ---------------------------------------------------------------------------

SpectralModel::SpectralModel(const StaggeredGrid& grid, const DensityProfile& profile, const PhysicalParams& params,
                             double projection_tol)
    : grid_(grid), profile_(profile), params_(params), projector_(grid, projection_tol) {
    params_.validate();
    samples_ = ProfileSamples::make(grid_, profile_);
    for (int a = 0; a < grid_.dim(); ++a) {
        fast_[a] = SeparableSolver::velocity_component(grid_, a);
        lap_norm_ += 4.0 / (grid_.h(a) * grid_.h(a));
    }
    strat_ = profile_.classify(grid_.length(grid_.gravity_axis()));
}

VectorField SpectralModel::buoyancy_force(const VectorField& v) const {
    ScalarField c = gravity_to_cells(v);
    const auto d = samples_.drho.values();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= params_.g * d[i];
    return cells_to_gravity(c);
}

VectorField SpectralModel::apply_operator(const VectorField& v, double s) const {
    VectorField out = buoyancy_force(v);
    if (s != 0.0) out.axpy(s * params_.mu, discrete_laplacian(v));
    return out;
}

VectorField SpectralModel::apply_mass(const VectorField& v) const {
    VectorField out = v;
    const auto w = samples_.face_rho.flat();
    auto o = out.flat();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] *= w[i];
    out.enforce_no_slip();
    return out;
}

void SpectralModel::project(VectorField& v, ScalarField* potential) const {
    v.enforce_no_slip();
    projector_.project_in_place(v, potential);
}

void SpectralModel::separable_solve(double c, double kappa, std::span<const double> r, std::span<double> x) const {
    const VectorField& layout = samples_.face_rho;
    for (int a = 0; a < grid_.dim(); ++a) {
        const std::size_t off = layout.offset(a);
        const std::size_t len = grid_.face_extent(a).size();
        fast_[a].solve(c, -kappa, r.subspan(off, len), x.subspan(off, len));
    }
}

double SpectralModel::alpha_upper_bound() const { return params_.g * std::max(0.0, samples_.ratio_max); }

// ---------------------------------------------------------------------------

void fix_sign(VectorField& v, ScalarField* companion) {
    const int ga = v.grid().gravity_axis();
    auto pick = [](std::span<const double> s) {
        double best = 0.0;
        for (double x : s)
            if (std::abs(x) > std::abs(best)) best = x;
        return best;
    };
    double lead = pick(v.comp(ga));
    if (lead == 0.0) lead = pick(v.flat());
    if (lead < 0.0) {
        v *= -1.0;
        if (companion) *companion *= -1.0;
    }
}

EnergyBreakdown energy_E(const VectorField& v, double s, const SpectralModel& model) {
    require_same_grid(model.grid(), v.grid(), "energy_E");
    const auto& g = model.grid();
    double hmin = g.h(0);
    for (int a = 1; a < g.dim(); ++a) hmin = std::min(hmin, g.h(a));
    if (v.boundary_normal_max() > 0.0) throw PreconditionError("energy_E: field must vanish on wall-normal faces");
    const double vn = v.l2_norm();
    if (discrete_divergence(v).l2_norm() * hmin > 1e-7 * vn)
        throw PreconditionError("energy_E: field is not divergence free (project it first)");
    EnergyBreakdown e;
    e.s = s;
    const ScalarField c = gravity_to_cells(v);
    ScalarField wc = c;
    const auto d = model.samples().drho.values();
    for (std::size_t i = 0; i < wc.size(); ++i) wc[i] *= d[i];
    e.buoyancy = model.params().g * cell_inner(c, wc);
    e.dissipation = model.params().mu * h1_seminorm_sq(v);
    e.mass = face_weighted_inner(v, v, model.samples().face_rho);
    return e;
}

EigenSolution alpha(double s, const SpectralModel& model, const EigenOptions& opts, const EigenSolution* warm) {
    if (!(s >= 0.0)) throw PreconditionError("alpha: s must be >= 0");
    const auto& grid = model.grid();
    const auto& smp = model.samples();
    const double g = model.params().g;
    const double mu = model.params().mu;

    EigenProblem p;
    p.size = smp.face_rho.flat_size();
    auto tmp = std::make_shared<VectorField>(grid);
    p.apply_a = [&model, s, tmp](std::span<const double> in, std::span<double> out) {
        copy_in(in, *tmp);
        copy_out(model.apply_operator(*tmp, s), out);
    };
    p.apply_m = [&model, tmp](std::span<const double> in, std::span<double> out) {
        copy_in(in, *tmp);
        copy_out(model.apply_mass(*tmp), out);
    };
    p.project = [&model, tmp](std::span<double> x) {
        copy_in(x, *tmp);
        model.project(*tmp);
        copy_out(*tmp, x);
    };
    const double rho_mean = smp.rho.mean();
    const double guess = warm ? std::abs(warm->eigenvalue) : model.alpha_upper_bound();
    double sigma = g * smp.drho_abs_max + rho_mean * guess;
    if (sigma == 0.0 && s == 0.0) sigma = rho_mean;
    const double kappa = s * mu;
    p.precond = [&model, sigma, kappa](std::span<const double> in, std::span<double> out) {
        model.separable_solve(sigma, kappa, in, out);
    };
    p.norm_a = g * smp.drho_abs_max + s * mu * model.laplacian_norm();
    p.norm_m = max_of(smp.face_rho.flat());

    LobpcgOptions lo;
    lo.block = opts.block;
    lo.tol = opts.tol;
    lo.max_iterations = opts.max_iterations;
    lo.seed = opts.seed;
    std::vector<std::vector<double>> init;
    if (warm && warm->velocity.grid() == grid)
        init.emplace_back(warm->velocity.flat().begin(), warm->velocity.flat().end());
    const LobpcgResult r = lobpcg(p, lo, init);

    EigenSolution sol;
    sol.s = s;
    sol.velocity = VectorField(grid);
    copy_in(r.vectors[0], sol.velocity);
    fix_sign(sol.velocity);
    const EnergyBreakdown e = energy_E(sol.velocity, s, model);
    sol.velocity *= 1.0 / std::sqrt(e.mass);
    sol.eigenvalue = e.value() / e.mass;
    sol.second_eigenvalue = r.values.size() > 1 ? r.values[1] : sol.eigenvalue;
    sol.residual_norm = r.residuals[0];
    sol.iterations = r.iterations;

    VectorField w = model.apply_operator(sol.velocity, s);
    w.axpy(-sol.eigenvalue, model.apply_mass(sol.velocity));
    ScalarField phi(grid);
    model.project(w, &phi);
    sol.pressure = s > 0.0 ? (1.0 / s) * phi : phi;
    sol.density_mode = ScalarField(grid);
    if (s > 0.0) {
        const ScalarField c = gravity_to_cells(sol.velocity);
        const auto d = smp.drho.values();
        for (std::size_t i = 0; i < c.size(); ++i) sol.density_mode[i] = -d[i] * c[i] / s;
    }
    return sol;
}

double stokes_lambda1(const StaggeredGrid& grid, const EigenOptions& opts) {
    const Projector proj(grid, opts.projection_tol);
    std::array<SeparableSolver, 3> fast{};
    double lap_norm = 0.0;
    for (int a = 0; a < grid.dim(); ++a) {
        fast[a] = SeparableSolver::velocity_component(grid, a);
        lap_norm += 4.0 / (grid.h(a) * grid.h(a));
    }
    const VectorField layout(grid);
    auto tmp = std::make_shared<VectorField>(grid);
    EigenProblem p;
    p.size = layout.flat_size();
    p.apply_a = [tmp](std::span<const double> in, std::span<double> out) {
        copy_in(in, *tmp);
        copy_out(discrete_laplacian(*tmp), out);
    };
    p.apply_m = [tmp](std::span<const double> in, std::span<double> out) {
        copy_in(in, *tmp);
        tmp->enforce_no_slip();
        copy_out(*tmp, out);
    };
    p.project = [&proj, tmp](std::span<double> x) {
        copy_in(x, *tmp);
        tmp->enforce_no_slip();
        proj.project_in_place(*tmp);
        copy_out(*tmp, x);
    };
    p.precond = [&](std::span<const double> in, std::span<double> out) {
        for (int a = 0; a < grid.dim(); ++a) {
            const std::size_t off = layout.offset(a);
            const std::size_t len = grid.face_extent(a).size();
            fast[a].solve(0.0, -1.0, in.subspan(off, len), out.subspan(off, len));
        }
    };
    p.norm_a = lap_norm;
    p.norm_m = 1.0;
    LobpcgOptions lo;
    lo.block = opts.block;
    lo.tol = opts.tol;
    lo.max_iterations = opts.max_iterations;
    lo.seed = opts.seed;
    return -lobpcg(p, lo).values[0];
}

// ---------------------------------------------------------------------------

BumpCertificate bump_certificate(const SpectralModel& model, const BumpOptions& opts) {
    const auto& grid = model.grid();
    const auto& prof = model.profile();
    const int ga = grid.gravity_axis();
    const int hx = ga == 0 ? 1 : 0;
    const int third = 3 - ga - hx;
    const bool three_d = grid.dim() == 3;
    const int nz = grid.cells(ga);

    // vertical node where rho' peaks, ties broken towards the middle; nodes
    // closer than two cells to a wall cannot carry a bump
    int jstar = -1;
    double best = 0.0;
    for (int j = 2; j <= nz - 2; ++j) {
        const double d = prof.drho(grid.node(ga, j));
        const bool better = d > best * (1.0 + 1e-12) ||
                            (jstar >= 0 && std::abs(d - best) <= 1e-12 * std::abs(best) &&
                             std::abs(j - nz / 2) < std::abs(jstar - nz / 2));
        if (d > 0.0 && better) {
            best = std::max(best, d);
            jstar = j;
        }
    }
    if (jstar < 0) throw PreconditionError("bump_certificate: no positive rho' region on this grid");
    int jlo = jstar, jhi = jstar;
    while (jlo > 0 && prof.drho(grid.node(ga, jlo - 1)) > 0.0) --jlo;
    while (jhi < nz && prof.drho(grid.node(ga, jhi + 1)) > 0.0) ++jhi;
    int r_idx = std::min(jstar - jlo, jhi - jstar);
    r_idx = std::max(r_idx, std::min(jstar, nz - jstar) > 0 ? 1 : 0);
    r_idx = std::min(r_idx, std::min(jstar, nz - jstar));
    if (opts.radius_cap) r_idx = std::min(r_idx, static_cast<int>(std::floor(*opts.radius_cap / grid.h(ga) + 1e-9)));
    if (r_idx < 2)
        throw PreconditionError("bump_certificate: unstable region spans fewer than two cells; refine the grid");

    const double zc = grid.node(ga, jstar);
    const double rz = r_idx * grid.h(ga);
    const int ic = grid.cells(hx) / 2;
    const double xc = grid.node(hx, ic);
    const double rx = std::min(ic, grid.cells(hx) - ic) * grid.h(hx);
    const double yc = 0.5 * grid.length(third);

    auto phi = [&](int i, int j, int k) {
        double v = bump_profile((grid.node(hx, i) - xc) / rx) * bump_profile((grid.node(ga, j) - zc) / rz);
        if (three_d) v *= bump_profile((grid.center(third, k) - yc) / (0.5 * grid.length(third)));
        return v;
    };

    VectorField f(grid);
    const int nk = three_d ? grid.cells(third) : 1;
    for (int k = 0; k < nk; ++k) {
        // faces normal to hx: (node i, center j)
        for (int i = 0; i <= grid.cells(hx); ++i)
            for (int j = 0; j < nz; ++j) {
                std::array<int, 3> idx{};
                idx[hx] = i;
                idx[ga] = j;
                idx[third] = k;
                f.at(hx, idx[0], idx[1], idx[2]) = -(phi(i, j + 1, k) - phi(i, j, k)) / grid.h(ga);
            }
        // faces normal to ga: (center i, node j)
        for (int i = 0; i < grid.cells(hx); ++i)
            for (int j = 0; j <= nz; ++j) {
                std::array<int, 3> idx{};
                idx[hx] = i;
                idx[ga] = j;
                idx[third] = k;
                f.at(ga, idx[0], idx[1], idx[2]) = (phi(i + 1, j, k) - phi(i, j, k)) / grid.h(hx);
            }
    }
    f.enforce_no_slip();

    const EnergyBreakdown e = energy_E(f, 0.0, model);
    BumpCertificate c;
    c.c3 = e.buoyancy / e.mass;
    c.c4 = e.dissipation / e.mass;
    c.center = zc;
    c.radius = rz;
    c.field = std::move(f);
    if (!(c.c3 > 0.0)) throw PreconditionError("bump_certificate: bump buoyancy is not positive");
    return c;
}

UpperBracket s_upper_bracket(const SpectralModel& model, const EigenOptions& opts) {
    UpperBracket b;
    const double dmax = max_of(model.samples().drho.values());
    if (dmax <= 0.0) return b;
    b.lambda1 = stokes_lambda1(model.grid(), opts);
    b.c5 = model.params().g * dmax / b.lambda1;
    b.s_cap = b.c5 / model.params().mu;
    double s = b.s_cap / 32.0;
    // alpha(s) >= c3 - s c4 > 0 below c3/c4: those doublings need no eigensolve,
    // and near s = 0 the top of the spectrum clusters and converges slowly.
    try {
        const BumpCertificate c = bump_certificate(model);
        b.certified_below = c.c3 / c.c4;
        while (s < b.certified_below && s < b.s_cap) s = std::min(2.0 * s, b.s_cap);
    } catch (const PreconditionError&) {
        b.certified_below = 0.0;
    }
    std::optional<EigenSolution> prev;
    for (;;) {
        EigenSolution sol = alpha(s, model, opts, prev ? &*prev : nullptr);
        b.evaluations.emplace_back(s, sol.eigenvalue);
        if (sol.eigenvalue <= 0.0 || s >= b.s_cap) {
            b.s_hat = s;
            break;
        }
        prev = std::move(sol);
        s = std::min(2.0 * s, b.s_cap);
    }
    return b;
}

// ---------------------------------------------------------------------------

namespace {

void require_uniformly_unstable(const SpectralModel& model, const char* what) {
    if (model.stratification() != Stratification::UniformlyUnstable ||
        *std::min_element(model.samples().drho.values().begin(), model.samples().drho.values().end()) <= 0.0)
        throw PreconditionError(std::string(what) + ": profile must be uniformly unstable (inf rho' > 0)");
}

}  // namespace

DualEnergy energy_EN(const ScalarField& rho, const VectorField& v, const SpectralModel& model) {
    require_uniformly_unstable(model, "energy_EN");
    require_same_grid(model.grid(), rho.grid(), "energy_EN");
    require_same_grid(model.grid(), v.grid(), "energy_EN");
    const double g = model.params().g;
    const double mu = model.params().mu;
    const ScalarField c = gravity_to_cells(v);
    ScalarField scaled = rho;
    const auto d = model.samples().drho.values();
    for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] /= d[i];
    DualEnergy e;
    e.e_n = -(mu / g) * h1_seminorm_sq(v) - 2.0 * cell_inner(rho, c);
    e.j_n = cell_inner(rho, scaled) + face_weighted_inner(v, v, model.samples().face_rho) / g;
    return e;
}

DualSolution lambda_N(const SpectralModel& model, const EigenOptions& opts) {
    require_uniformly_unstable(model, "lambda_N");
    const auto& grid = model.grid();
    const auto& smp = model.samples();
    const double g = model.params().g;
    const double mu = model.params().mu;
    const std::size_t nc = grid.num_cells();
    const std::size_t nf = smp.face_rho.flat_size();
    const auto drho = smp.drho.values();

    struct Scratch {
        ScalarField r;
        VectorField v;
    };
    auto sc = std::make_shared<Scratch>(Scratch{ScalarField(grid), VectorField(grid)});
    auto unpack = [sc, nc](std::span<const double> in) {
        std::copy(in.begin(), in.begin() + static_cast<std::ptrdiff_t>(nc), sc->r.values().begin());
        copy_in(in.subspan(nc), sc->v);
    };

    EigenProblem p;
    p.size = nc + nf;
    p.apply_a = [&, sc, unpack](std::span<const double> in, std::span<double> out) {
        unpack(in);
        const ScalarField av = gravity_to_cells(sc->v);
        for (std::size_t i = 0; i < nc; ++i) out[i] = -av[i];
        VectorField f = discrete_laplacian(sc->v);
        f *= mu / g;
        f.axpy(-1.0, cells_to_gravity(sc->r));
        copy_out(f, out.subspan(nc));
    };
    p.apply_m = [&, sc, unpack](std::span<const double> in, std::span<double> out) {
        unpack(in);
        for (std::size_t i = 0; i < nc; ++i) out[i] = sc->r[i] / drho[i];
        VectorField m = model.apply_mass(sc->v);
        m *= 1.0 / g;
        copy_out(m, out.subspan(nc));
    };
    p.project = [&, sc](std::span<double> x) {
        copy_in(x.subspan(nc), sc->v);
        model.project(sc->v);
        copy_out(sc->v, x.subspan(nc));
    };
    const double lam_est = std::sqrt(std::max(model.alpha_upper_bound(), 1e-300));
    const double rho_mean = smp.rho.mean();
    p.precond = [&, lam_est, rho_mean](std::span<const double> in, std::span<double> out) {
        for (std::size_t i = 0; i < nc; ++i) out[i] = drho[i] * in[i] / lam_est;
        model.separable_solve(lam_est * rho_mean / g, mu / g, in.subspan(nc), out.subspan(nc));
    };
    p.norm_a = 1.0 + (mu / g) * model.laplacian_norm();
    p.norm_m = std::max(1.0 / *std::min_element(drho.begin(), drho.end()), max_of(smp.face_rho.flat()) / g);

    LobpcgOptions lo;
    lo.block = opts.block;
    lo.tol = opts.tol;
    lo.max_iterations = opts.max_iterations;
    lo.seed = opts.seed;
    const LobpcgResult r = lobpcg(p, lo);

    DualSolution out;
    out.eigen.velocity = VectorField(grid);
    out.eigen.density_mode = ScalarField(grid);
    std::copy(r.vectors[0].begin(), r.vectors[0].begin() + static_cast<std::ptrdiff_t>(nc),
              out.eigen.density_mode.values().begin());
    copy_in(std::span<const double>(r.vectors[0]).subspan(nc), out.eigen.velocity);
    fix_sign(out.eigen.velocity, &out.eigen.density_mode);
    const DualEnergy e = energy_EN(out.eigen.density_mode, out.eigen.velocity, model);
    const double scale = 1.0 / std::sqrt(e.j_n);
    out.eigen.velocity *= scale;
    out.eigen.density_mode *= scale;
    out.lambda_n = e.e_n / e.j_n;
    out.eigen.eigenvalue = out.lambda_n;
    out.eigen.s = out.lambda_n;
    out.eigen.second_eigenvalue = r.values.size() > 1 ? r.values[1] : out.lambda_n;
    out.eigen.residual_norm = r.residuals[0];
    out.eigen.iterations = r.iterations;

    const ScalarField av = gravity_to_cells(out.eigen.velocity);
    ScalarField diff = out.eigen.density_mode;
    for (std::size_t i = 0; i < nc; ++i) diff[i] += drho[i] * av[i] / out.lambda_n;
    out.elimination_error = diff.l2_norm() / out.eigen.density_mode.l2_norm();

    // pressure of the equivalent velocity problem at s = Lambda_N
    VectorField w = model.apply_operator(out.eigen.velocity, out.lambda_n);
    w.axpy(-out.lambda_n * out.lambda_n, model.apply_mass(out.eigen.velocity));
    ScalarField phi(grid);
    model.project(w, &phi);
    out.eigen.pressure = (1.0 / out.lambda_n) * phi;
    return out;
}

// ---------------------------------------------------------------------------

bool AlphaCurve::monotone(double tol) const {
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (samples[i].alpha > samples[i - 1].alpha + tol) return false;
    return true;
}

bool AlphaCurve::lower_bound_holds(double tol) const {
    if (!has_certificate) return true;
    return std::all_of(samples.begin(), samples.end(),
                       [&](const AlphaSample& a) { return a.alpha >= c3 - c4 * a.s - tol; });
}

bool AlphaCurve::upper_bound_holds(double tol) const {
    return std::all_of(samples.begin(), samples.end(),
                       [&](const AlphaSample& a) { return a.alpha <= upper_bound + tol; });
}

bool AlphaCurve::lipschitz_holds(double tol) const {
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (std::abs(samples[i].alpha - samples[i - 1].alpha) > lipschitz * (samples[i].s - samples[i - 1].s) + tol)
            return false;
    return true;
}

void AlphaCurve::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out.precision(17);
    out << "s,alpha,residual,c3_minus_c4s,upper_bound\n";
    for (const auto& a : samples) {
        out << a.s << ',' << a.alpha << ',' << a.residual << ',';
        if (has_certificate)
            out << c3 - c4 * a.s;
        else
            out << "nan";
        out << ',' << upper_bound << '\n';
    }
}

nlohmann::json AlphaCurve::to_json() const {
    nlohmann::json j;
    j["samples"] = nlohmann::json::array();
    for (const auto& a : samples)
        j["samples"].push_back({{"s", a.s},
                                {"alpha", a.alpha},
                                {"residual", a.residual},
                                {"iterations", a.iterations},
                                {"dissipation_ratio", a.dissipation_ratio}});
    j["certificate"] = has_certificate ? nlohmann::json{{"c3", c3}, {"c4", c4}} : nlohmann::json(nullptr);
    j["upper_bound"] = upper_bound;
    j["s_upper"] = s_upper ? nlohmann::json(*s_upper) : nlohmann::json(nullptr);
    j["lipschitz_estimate"] = lipschitz;
    return j;
}

AlphaCurve sample_alpha_curve(const SpectralModel& model, std::vector<double> s_values, const EigenOptions& opts,
                              int workers) {
    std::sort(s_values.begin(), s_values.end());
    AlphaCurve curve;
    curve.samples.resize(s_values.size());
    std::vector<std::exception_ptr> errors(s_values.size());
    auto work = [&](std::size_t first, std::size_t stride) {
        for (std::size_t i = first; i < s_values.size(); i += stride) {
            try {
                const EigenSolution sol = alpha(s_values[i], model, opts);
                const EnergyBreakdown e = energy_E(sol.velocity, sol.s, model);
                curve.samples[i] = {s_values[i], sol.eigenvalue, sol.residual_norm, sol.iterations,
                                    e.dissipation / e.mass};
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t nw = static_cast<std::size_t>(std::max(1, std::min(workers, static_cast<int>(s_values.size()))));
    if (nw <= 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < nw; ++w) pool.emplace_back(work, w, nw);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    curve.upper_bound = model.alpha_upper_bound();
    for (const auto& a : curve.samples) curve.lipschitz = std::max(curve.lipschitz, a.dissipation_ratio);
    try {
        const BumpCertificate b = bump_certificate(model);
        curve.c3 = b.c3;
        curve.c4 = b.c4;
        curve.has_certificate = true;
    } catch (const PreconditionError&) {
        curve.has_certificate = false;
    }
    return curve;
}

}  // namespace rtspectra
