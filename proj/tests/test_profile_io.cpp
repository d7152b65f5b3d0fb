#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "rtspectra/errors.hpp"
#include "rtspectra/field_io.hpp"
#include "rtspectra/profile.hpp"
#include "test_support.hpp"

using namespace rtspectra;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& body) {
    const auto dir = std::filesystem::temp_directory_path() / "rtspectra_tests";
    std::filesystem::create_directories(dir);
    const auto p = dir / name;
    std::ofstream(p, std::ios::binary) << body;
    return p;
}

}  // namespace

TEST_CASE("profile classification") {
    CHECK(DensityProfile::linear(1, 1).classify(1.0) == Stratification::UniformlyUnstable);
    CHECK(DensityProfile::linear(2, -1).classify(1.0) == Stratification::Stable);
    CHECK(DensityProfile::exponential(1, 1).classify(1.0) == Stratification::UniformlyUnstable);
    CHECK(DensityProfile::linear(1, 0).classify(1.0) == Stratification::Indeterminate);
    // positive rho' concentrated in a band: decays to far below the margin at the walls
    const auto t = DensityProfile::tanh(2.0, 0.5, 0.5, 0.05);
    CHECK(t.classify(1.0) == Stratification::RtUnstable);
    CHECK(std::string(to_string(t.classify(1.0))) == "rt_unstable");
    // a profile that changes sign
    const auto mixed = DensityProfile::tabulated({0.0, 0.3, 0.6, 1.0}, {1.0, 1.5, 1.2, 1.1});
    CHECK(mixed.classify(1.0) == Stratification::RtUnstable);
}

TEST_CASE("analytic derivatives") {
    const auto e = DensityProfile::exponential(1.5, 0.7);
    const auto t = DensityProfile::tanh(2.0, 0.5, 0.4, 0.2);
    for (const auto* p : {&e, &t})
        for (double z : {0.1, 0.35, 0.8}) {
            const double h = 1e-5;
            CHECK(p->drho(z) == doctest::Approx((p->rho(z + h) - p->rho(z - h)) / (2 * h)).epsilon(1e-8));
            CHECK(*p->d2rho(z) == doctest::Approx((p->drho(z + h) - p->drho(z - h)) / (2 * h)).epsilon(1e-7));
        }
}

TEST_CASE("tabulated profile uses the interpolant derivative") {
    std::vector<double> z, r;
    for (int i = 0; i <= 40; ++i) {
        z.push_back(i / 40.0);
        r.push_back(1.0 + z.back() * z.back());
    }
    const auto p = DensityProfile::tabulated(z, r);
    CHECK(p.rho(0.5) == doctest::Approx(1.25).epsilon(1e-4));
    CHECK(p.drho(0.5) == doctest::Approx(1.0).epsilon(1e-2));
    CHECK_FALSE(p.d2rho(0.5).has_value());
    CHECK_THROWS_AS(DensityProfile::tabulated({0, 1, 2}, {1, 1, 1}), std::invalid_argument);
}

TEST_CASE("profile spec round trip and registry errors") {
    for (const std::string s : {"linear(1,1)", "exponential(1,0.5)", "tanh(2,0.5,0.5,0.1)"}) {
        const auto p = DensityProfile::parse(s);
        CHECK(DensityProfile::parse(p.spec()).spec() == p.spec());
    }
    CHECK_THROWS_AS(DensityProfile::parse("cubic(1,2)"), std::invalid_argument);
    CHECK_THROWS_AS(DensityProfile::parse("linear(1)"), std::invalid_argument);
    CHECK_THROWS_AS(DensityProfile::parse("linear(1,x)"), std::invalid_argument);
    CHECK_THROWS_AS(DensityProfile::parse("tanh(1,1,0.5,0)"), std::invalid_argument);

    const auto g = StaggeredGrid::unit_box(2, 8);
    CHECK_THROWS_AS(DensityProfile::linear(0.5, -1.0).validate_on(g), PreconditionError);
    CHECK_NOTHROW(DensityProfile::linear(2.0, -1.0).validate_on(g));
}

TEST_CASE("tabulated file parsing reports byte offsets") {
    const auto good = temp_file("good.txt", "# z rho\n0 1\n0.25 1.25\n0.5 1.5\n\n0.75 1.75\n1.0 2.0\n");
    const auto p = DensityProfile::parse("tabulated(" + good.string() + ")");
    CHECK(p.kind() == ProfileKind::Tabulated);
    CHECK(p.rho(0.6) == doctest::Approx(1.6).epsilon(1e-12));
    CHECK(p.classify(1.0) == Stratification::UniformlyUnstable);

    const std::string body = "0 1\n0.25 1.25\n0.5 1.x5\n0.75 1.75\n";
    const auto bad = temp_file("bad.txt", body);
    try {
        DensityProfile::tabulated_file(bad.string());
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() == body.find("1.x5"));
        CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
    }
    const auto cols = temp_file("cols.txt", "0 1\n0.25 1.25 7\n");
    CHECK_THROWS_AS(DensityProfile::tabulated_file(cols.string()), ParseError);
    const auto order = temp_file("order.txt", "0 1\n0.5 1.25\n0.25 1\n1 2\n");
    CHECK_THROWS_AS(DensityProfile::tabulated_file(order.string()), ParseError);
}

TEST_CASE("physical parameters") {
    PhysicalParams p;
    CHECK_NOTHROW(p.validate());
    p.mu = -0.1;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("mu > 0"), std::invalid_argument);
    p.mu = 0.1;
    p.g = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("profile samples") {
    const auto g = StaggeredGrid::unit_box(2, 8);
    const auto s = ProfileSamples::make(g, DensityProfile::linear(1, 1));
    CHECK(s.rho.at(0, 0) == doctest::Approx(1.0625));
    CHECK(s.drho_abs_max == 1.0);
    CHECK(s.ratio_max == doctest::Approx(1.0 / 1.0625));
    CHECK(s.face_rho.at(1, 0, 4) == doctest::Approx(1.5));
}

TEST_CASE("binary field snapshots round trip") {
    std::mt19937_64 rng(4);
    BoxDomain d;
    d.dim = 3;
    d.lengths = {1.0, 2.0, 0.5};
    d.gravity_axis = 2;
    const StaggeredGrid g(d, {4, 6, 5});
    const ScalarField s = testing::random_scalar(g, rng);
    const VectorField v = testing::random_interior(g, rng);

    std::stringstream ss;
    write_field(ss, s);
    CHECK(ss.str().size() == kFieldHeaderBytes + 8 * s.size());
    CHECK(ss.str().substr(0, 8) == "RTSFIELD");
    const ScalarField s2 = read_scalar_field(ss);
    CHECK(s2.grid() == g);
    CHECK(std::equal(s.values().begin(), s.values().end(), s2.values().begin()));

    std::stringstream sv;
    write_field(sv, v);
    const VectorField v2 = read_vector_field(sv);
    CHECK(std::equal(v.flat().begin(), v.flat().end(), v2.flat().begin()));

    // kind mismatch and truncation
    std::stringstream again(sv.str());
    CHECK_THROWS_AS(read_scalar_field(again), ParseError);
    std::stringstream cut(sv.str().substr(0, kFieldHeaderBytes + 100));
    try {
        read_vector_field(cut);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() == kFieldHeaderBytes + 100);
    }
    std::string corrupt = ss.str();
    corrupt[0] = 'X';
    std::stringstream bad(corrupt);
    CHECK_THROWS_AS(read_scalar_field(bad), ParseError);
}

TEST_CASE("csv export") {
    const auto g = StaggeredGrid::unit_box(2, 4);
    const ScalarField s(g, 2.0);
    const auto p = std::filesystem::temp_directory_path() / "rtspectra_tests" / "s.csv";
    std::filesystem::create_directories(p.parent_path());
    write_csv(p, s);
    std::ifstream in(p);
    std::string line;
    int rows = 0;
    std::getline(in, line);
    CHECK(line == "x0,x1,value");
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 16);
    CHECK_THROWS_AS(write_csv(p, ScalarField(StaggeredGrid::unit_box(2, 64)), 100), PreconditionError);
}
