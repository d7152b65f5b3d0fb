#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "rtspectra/errors.hpp"
#include "rtspectra/lobpcg.hpp"

using namespace rtspectra;

namespace {

struct Dense {
    Eigen::MatrixXd a, m;
};

Dense random_pencil(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd b(n, n), c(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            b(i, j) = nd(rng);
            c(i, j) = nd(rng);
        }
    Dense d;
    d.a = 0.5 * (b + b.transpose());
    d.m = c * c.transpose() / n + Eigen::MatrixXd::Identity(n, n);
    return d;
}

EigenProblem as_problem(const Dense& d) {
    EigenProblem p;
    p.size = static_cast<std::size_t>(d.a.rows());
    p.apply_a = [&d](std::span<const double> x, std::span<double> y) {
        Eigen::Map<Eigen::VectorXd>(y.data(), y.size()) =
            d.a * Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
    };
    p.apply_m = [&d](std::span<const double> x, std::span<double> y) {
        Eigen::Map<Eigen::VectorXd>(y.data(), y.size()) =
            d.m * Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
    };
    p.norm_a = d.a.operatorNorm();
    p.norm_m = d.m.operatorNorm();
    return p;
}

}  // namespace

TEST_CASE("lobpcg matches a dense generalized eigensolve") {
    const Dense d = random_pencil(60, 3);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(d.a, d.m);
    const auto r = lobpcg(as_problem(d), {});
    REQUIRE(r.converged);
    CHECK(r.values[0] == doctest::Approx(es.eigenvalues()(59)).epsilon(1e-10));
    CHECK(r.values[1] == doctest::Approx(es.eigenvalues()(58)).epsilon(1e-6));
    const Eigen::Map<const Eigen::VectorXd> x(r.vectors[0].data(), 60);
    CHECK(x.dot(d.m * x) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lobpcg respects a projector") {
    // restrict to vectors orthogonal to e_0 .. e_4: the largest eigenvalue
    // of diag(100, 99, ..., ) within that range is the sixth entry
    const int n = 50;
    Dense d;
    d.a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) d.a(i, i) = 100.0 - i;
    d.m = Eigen::MatrixXd::Identity(n, n);
    EigenProblem p = as_problem(d);
    p.project = [](std::span<double> x) {
        for (int i = 0; i < 5; ++i) x[i] = 0.0;
    };
    const auto r = lobpcg(p, {});
    CHECK(r.values[0] == doctest::Approx(95.0).epsilon(1e-12));
    CHECK(r.vectors[0][0] == 0.0);
}

TEST_CASE("lobpcg is deterministic and reports stagnation") {
    const Dense d = random_pencil(40, 8);
    LobpcgOptions o;
    o.seed = 42;
    const auto a = lobpcg(as_problem(d), o);
    const auto b = lobpcg(as_problem(d), o);
    CHECK(a.values[0] == b.values[0]);
    CHECK(a.iterations == b.iterations);
    o.max_iterations = 1;
    o.tol = 1e-15;
    CHECK_THROWS_AS(lobpcg(as_problem(d), o), SolverError);
}
