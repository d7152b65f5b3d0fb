#include <cmath>
#include <random>

#include "doctest.h"
#include "oracle/dense_oracle.hpp"
#include "rtspectra/errors.hpp"
#include "rtspectra/operators.hpp"
#include "rtspectra/spectra.hpp"
#include "test_support.hpp"

using namespace rtspectra;

namespace {

const PhysicalParams kParams{0.1, 1.0};

oracle::Assembly dense_for(const DensityProfile& p, int n = 8) {
    oracle::Box b;
    b.n = {n, n, 1};
    return oracle::assemble(b, [&](double z) { return p.rho(z); }, [&](double z) { return p.drho(z); });
}

// Gauss-Legendre nodes on [0,1], 12 points: exact for the polynomial
// integrands of the bump below.
double gauss2d(const std::function<double(double, double)>& f) {
    static const double x[6] = {0.1252334085114689, 0.3678314989981802, 0.5873179542866175,
                                0.7699026741943047, 0.9041172563704749, 0.9815606342467192};
    static const double w[6] = {0.2491470458134028, 0.2334925365383548, 0.2031674267230659,
                                0.1600783285433462, 0.1069393259953184, 0.0471753363865118};
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 6; ++i) {
        pts.emplace_back(0.5 * (1 - x[i]), 0.5 * w[i]);
        pts.emplace_back(0.5 * (1 + x[i]), 0.5 * w[i]);
    }
    double s = 0.0;
    for (auto [xi, wi] : pts)
        for (auto [yj, wj] : pts) s += wi * wj * f(xi, yj);
    return s;
}

double max_div(const VectorField& v) {
    const ScalarField d = discrete_divergence(v);
    return std::max(d.max(), -d.min());
}

}  // namespace

TEST_CASE("energy functional basics") {
    const auto g = StaggeredGrid::unit_box(2, 16);
    const SpectralModel unstable(g, DensityProfile::linear(1, 1), kParams);
    const EnergyBreakdown z = energy_E(VectorField(g), 0.3, unstable);
    CHECK(z.buoyancy == 0.0);
    CHECK(z.dissipation == 0.0);
    CHECK(z.mass == 0.0);

    const SpectralModel stable(g, DensityProfile::linear(2, -1), kParams);
    std::mt19937_64 rng(2);
    for (int t = 0; t < 10; ++t) {
        VectorField v = testing::random_interior(g, rng);
        stable.project(v);
        for (double s : {0.0, 0.1, 1.0}) CHECK(energy_E(v, s, stable).value() <= 0.0);
        const auto e = energy_E(v, 0.0, unstable);
        CHECK(e.value(0.5) == doctest::Approx(e.buoyancy - 0.5 * e.dissipation));
        CHECK(e.value(1.0) <= e.value(0.5));
    }
    VectorField bad = testing::random_interior(g, rng);
    CHECK_THROWS_AS(energy_E(bad, 0.0, unstable), PreconditionError);
}

TEST_CASE("energy of the bump converges to the continuous integrals") {
    // stream function F(2x-1) F(2z-1), F(t) = (1-t^2)^3, on rho = 1 + z
    const auto F = [](double t) { return std::pow(1 - t * t, 3); };
    const auto dF = [](double t) { return -6 * t * std::pow(1 - t * t, 2); };
    const auto d2F = [](double t) { return -6 * std::pow(1 - t * t, 2) + 24 * t * t * (1 - t * t); };
    // v = (-psi_z, psi_x)
    const auto vx = [&](double x, double z) { return -2 * F(2 * x - 1) * dF(2 * z - 1); };
    const auto vz = [&](double x, double z) { return 2 * dF(2 * x - 1) * F(2 * z - 1); };
    const double buoy = gauss2d([&](double x, double z) { return vz(x, z) * vz(x, z); });
    const double mass = gauss2d([&](double x, double z) { return (1 + z) * (vx(x, z) * vx(x, z) + vz(x, z) * vz(x, z)); });
    const double grad = gauss2d([&](double x, double z) {
        const double a = -4 * dF(2 * x - 1) * dF(2 * z - 1);  // d vx / dx
        const double b = -4 * F(2 * x - 1) * d2F(2 * z - 1);  // d vx / dz
        const double c = 4 * d2F(2 * x - 1) * F(2 * z - 1);   // d vz / dx
        const double d = 4 * dF(2 * x - 1) * dF(2 * z - 1);   // d vz / dz
        return a * a + b * b + c * c + d * d;
    });

    // second order with a visible h^3 term: three grids remove both
    std::array<EnergyBreakdown, 3> e{};
    int idx = 0;
    for (int n : {64, 128, 256}) {
        const auto g = StaggeredGrid::unit_box(2, n);
        const SpectralModel m(g, DensityProfile::linear(1, 1), kParams);
        const BumpCertificate b = bump_certificate(m);
        CHECK(b.center == doctest::Approx(0.5));
        CHECK(b.radius == doctest::Approx(0.5));
        e[idx++] = energy_E(b.field, 0.0, m);
    }
    const auto extrap = [](double e1, double e2, double e3) {
        const double r1 = (4 * e2 - e1) / 3;
        const double r2 = (4 * e3 - e2) / 3;
        return (8 * r2 - r1) / 7;
    };
    CHECK(std::abs(extrap(e[0].buoyancy, e[1].buoyancy, e[2].buoyancy) / buoy - 1) < 1e-6);
    CHECK(std::abs(extrap(e[0].mass, e[1].mass, e[2].mass) / mass - 1) < 1e-6);
    CHECK(std::abs(extrap(e[0].dissipation, e[1].dissipation, e[2].dissipation) / (kParams.mu * grad) - 1) < 1e-6);
}

TEST_CASE("energy agrees with the dense assembly") {
    const auto p = DensityProfile::exponential(1.0, 0.7);
    const auto as = dense_for(p);
    const auto g = StaggeredGrid::unit_box(2, 8);
    const SpectralModel m(g, p, kParams);
    std::mt19937_64 rng(6);
    VectorField v = testing::random_interior(g, rng);
    m.project(v);
    Eigen::VectorXd x(as.unknowns);
    for (int a = 0; a < 2; ++a)
        for (int j = 0; j < g.face_extent(a).n[1]; ++j)
            for (int i = 0; i < g.face_extent(a).n[0]; ++i) {
                const int r = as.face_index(a, i, j, 0);
                if (r >= 0) x(r) = v.at(a, i, j);
            }
    const double V = g.cell_volume();
    const auto e = energy_E(v, 0.0, m);
    const Eigen::VectorXd av = as.avg * x;
    CHECK(e.buoyancy == doctest::Approx(V * av.dot(as.drho.asDiagonal() * av)).epsilon(1e-12));
    CHECK(e.dissipation == doctest::Approx(-kParams.mu * V * x.dot(as.lap * x)).epsilon(1e-12));
    CHECK(e.mass == doctest::Approx(V * x.dot(as.face_rho.asDiagonal() * x)).epsilon(1e-12));
}

TEST_CASE("stokes eigenvalue matches the dense oracle") {
    const auto as = dense_for(DensityProfile::linear(1, 0));
    CHECK(stokes_lambda1(StaggeredGrid::unit_box(2, 8)) == doctest::Approx(oracle::stokes_lambda1(as)).epsilon(1e-9));
}

TEST_CASE("alpha for a constant profile is a scaled stokes eigenvalue") {
    const double c = 1.7;
    const auto p = DensityProfile::linear(c, 0.0);
    const auto as = dense_for(p);
    const double l1 = oracle::stokes_lambda1(as);
    const SpectralModel m(StaggeredGrid::unit_box(2, 8), p, kParams);
    for (double s : {0.2, 1.0, 3.0}) {
        const EigenSolution sol = alpha(s, m);
        CHECK(std::abs(sol.eigenvalue + s * kParams.mu / c * l1) <= 1e-8 * std::max(1.0, s * l1));
    }
}

TEST_CASE("alpha matches the dense generalized eigensolve") {
    const auto p = DensityProfile::linear(1, 1);
    const auto as = dense_for(p);
    const SpectralModel m(StaggeredGrid::unit_box(2, 8), p, kParams);
    for (int i = 0; i < 20; ++i) {
        const double s = 0.05 * (i + 1);
        const EigenSolution sol = alpha(s, m);
        CHECK(std::abs(sol.eigenvalue - oracle::alpha(as, s, kParams.mu, kParams.g)) <= 1e-8);
    }
}

TEST_CASE("alpha maximiser properties") {
    const auto g = StaggeredGrid::unit_box(2, 16);
    const SpectralModel m(g, DensityProfile::tanh(1.5, 0.3, 0.5, 0.2), kParams);
    const EigenSolution sol = alpha(0.2, m);
    const EnergyBreakdown e = energy_E(sol.velocity, 0.2, m);
    CHECK(e.mass == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(sol.eigenvalue - e.value() / e.mass) <= 1e-10 * std::abs(sol.eigenvalue));
    CHECK(discrete_divergence(sol.velocity).l2_norm() * g.h(0) <= 1e-10);
    CHECK(sol.residual_norm <= 1e-10);
    CHECK(sol.eigenvalue <= m.alpha_upper_bound());
    CHECK(sol.second_eigenvalue <= sol.eigenvalue + 1e-10);
    // sign convention
    double lead = 0.0;
    for (double x : sol.velocity.comp(1))
        if (std::abs(x) > std::abs(lead)) lead = x;
    CHECK(lead > 0.0);
    CHECK_THROWS_AS(alpha(-1.0, m), PreconditionError);
}

TEST_CASE("alpha is deterministic and warm starts agree") {
    const SpectralModel m(StaggeredGrid::unit_box(2, 16), DensityProfile::linear(1, 1), kParams);
    const EigenSolution a = alpha(0.1, m);
    const EigenSolution b = alpha(0.1, m);
    CHECK(a.eigenvalue == b.eigenvalue);
    CHECK((a.velocity - b.velocity).max_abs() == 0.0);
    const EigenSolution c = alpha(0.12, m, {}, &a);
    const EigenSolution d = alpha(0.12, m);
    CHECK(c.eigenvalue == doctest::Approx(d.eigenvalue).epsilon(1e-10));
    CHECK(c.iterations <= d.iterations);
}

TEST_CASE("bump certificate") {
    const auto g = StaggeredGrid::unit_box(2, 32);
    const SpectralModel m(g, DensityProfile::linear(1, 1), kParams);
    const BumpCertificate b = bump_certificate(m);
    CHECK(b.c3 > 0.0);
    CHECK(max_div(b.field) <= 1e-10);
    CHECK(b.field.boundary_normal_max() == 0.0);

    const SpectralModel stable(g, DensityProfile::linear(2, -1), kParams);
    CHECK_THROWS_WITH_AS(bump_certificate(stable), doctest::Contains("no positive rho' region"), PreconditionError);

    // translating the unstable band moves the bump; c3 unchanged
    BoxDomain d;
    d.lengths = {1.0, 2.0, 1.0};
    const StaggeredGrid tall(d, {16, 64, 1});
    const double shift = 8 * tall.h(1);
    const SpectralModel m1(tall, DensityProfile::tanh(2.0, 0.5, 0.8, 0.1), kParams);
    const SpectralModel m2(tall, DensityProfile::tanh(2.0, 0.5, 0.8 + shift, 0.1), kParams);
    const BumpOptions cap{0.25};
    const BumpCertificate b1 = bump_certificate(m1, cap);
    const BumpCertificate b2 = bump_certificate(m2, cap);
    CHECK(b2.center - b1.center == doctest::Approx(shift).epsilon(1e-12));
    CHECK(std::abs(b1.c3 - b2.c3) <= 1e-8 * b1.c3);
    CHECK(std::abs(b1.c4 - b2.c4) <= 1e-8 * b1.c4);
}

TEST_CASE("3D bump and alpha") {
    BoxDomain d;
    d.dim = 3;
    d.gravity_axis = 2;
    const StaggeredGrid g(d, {8, 8, 8});
    const SpectralModel m(g, DensityProfile::linear(1, 1), kParams);
    const BumpCertificate b = bump_certificate(m);
    CHECK(b.c3 > 0.0);
    CHECK(max_div(b.field) <= 1e-10);
    const EigenSolution sol = alpha(0.1, m);
    CHECK(sol.eigenvalue >= b.c3 - 0.1 * b.c4 - 1e-10);
    CHECK(sol.eigenvalue <= m.alpha_upper_bound());
}

TEST_CASE("alpha curve certificates") {
    const SpectralModel m(StaggeredGrid::unit_box(2, 16), DensityProfile::linear(1, 1), kParams);
    std::vector<double> s;
    for (int i = 0; i <= 10; ++i) s.push_back(0.02 + 0.03 * i);
    const AlphaCurve c1 = sample_alpha_curve(m, s, {}, 1);
    const AlphaCurve c3 = sample_alpha_curve(m, s, {}, 3);
    REQUIRE(c1.has_certificate);
    CHECK(c1.monotone(1e-10));
    CHECK(c1.lower_bound_holds(1e-10));
    CHECK(c1.upper_bound_holds(1e-10));
    CHECK(c1.lipschitz_holds(1e-10));
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(c1.samples[i].alpha == c3.samples[i].alpha);
    const auto j = c1.to_json();
    CHECK(j["samples"].size() == s.size());
    CHECK(j["certificate"]["c3"].get<double>() == c1.c3);
}

TEST_CASE("upper bracket") {
    const auto g = StaggeredGrid::unit_box(2, 16);
    const SpectralModel stable(g, DensityProfile::linear(2, -1), kParams);
    CHECK(s_upper_bracket(stable).s_hat == 0.0);

    const SpectralModel flat(g, DensityProfile::linear(1.5, 0.0), kParams);
    CHECK(s_upper_bracket(flat).s_hat == 0.0);

    const SpectralModel m(g, DensityProfile::linear(1, 1), kParams);
    const UpperBracket b = s_upper_bracket(m);
    CHECK(b.s_hat > 0.0);
    CHECK(b.s_hat <= b.s_cap);
    CHECK(alpha(b.s_hat, m).eigenvalue <= 0.0);
    if (b.s_hat > b.s_cap / 32.0 * 1.000001) CHECK(alpha(b.s_hat / 2.0, m).eigenvalue > 0.0);
    CHECK(b.evaluations.back().second <= 0.0);
}

TEST_CASE("dual energy") {
    const auto g = StaggeredGrid::unit_box(2, 16);
    const SpectralModel m(g, DensityProfile::linear(1, 1), PhysicalParams{0.001, 1.0});
    const DualEnergy z = energy_EN(ScalarField(g), VectorField(g), m);
    CHECK(z.e_n == 0.0);
    CHECK(z.j_n == 0.0);

    const BumpCertificate b = bump_certificate(m);
    ScalarField r = gravity_to_cells(b.field);
    r *= -1.0;
    const DualEnergy e = energy_EN(r, b.field, m);
    CHECK(e.e_n > 0.0);
    CHECK(e.j_n > 0.0);
    const DualEnergy e3 = energy_EN(3.0 * r, 3.0 * b.field, m);
    CHECK(e3.e_n == doctest::Approx(9.0 * e.e_n).epsilon(1e-13));
    CHECK(e3.j_n == doctest::Approx(9.0 * e.j_n).epsilon(1e-13));

    const SpectralModel band(g, DensityProfile::tanh(2.0, 0.5, 0.5, 0.05), kParams);
    CHECK_THROWS_AS(energy_EN(r, b.field, band), PreconditionError);
    CHECK_THROWS_AS(lambda_N(band), PreconditionError);
}

TEST_CASE("dual pencil matches the dense oracle") {
    const auto p = DensityProfile::linear(1, 1);
    const auto as = dense_for(p);
    const SpectralModel m(StaggeredGrid::unit_box(2, 8), p, kParams);
    const DualSolution d = lambda_N(m);
    CHECK(std::abs(d.lambda_n - oracle::lambda_n(as, kParams.mu, kParams.g)) <= 1e-8);
    CHECK(d.lambda_n > 0.0);
    CHECK(d.elimination_error <= 1e-6);
    const DualEnergy e = energy_EN(d.eigen.density_mode, d.eigen.velocity, m);
    CHECK(e.j_n == doctest::Approx(1.0).epsilon(1e-10));
}
