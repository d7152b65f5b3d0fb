#include "rtspectra/profile.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

// boost 1.74 pchip calls isnan unqualified
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

#include "rtspectra/errors.hpp"
#include "rtspectra/operators.hpp"

namespace rtspectra {

void PhysicalParams::validate() const {
    if (!(mu > 0.0)) throw std::invalid_argument("mu: shear viscosity must satisfy mu > 0");
    if (!(g > 0.0)) throw std::invalid_argument("g: gravitational constant must satisfy g > 0");
}

const char* to_string(Stratification s) {
    switch (s) {
        case Stratification::UniformlyUnstable: return "uniformly_unstable";
        case Stratification::RtUnstable: return "rt_unstable";
        case Stratification::Stable: return "stable";
        case Stratification::Indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

struct DensityProfile::Table {
    std::vector<double> z;
    std::vector<double> rho;
    boost::math::interpolators::pchip<std::vector<double>> interp;

    Table(std::vector<double> zz, std::vector<double> rr)
        : z(zz), rho(rr), interp(std::move(zz), std::move(rr)) {}
};

DensityProfile DensityProfile::linear(double a, double b) {
    DensityProfile p;
    p.kind_ = ProfileKind::Linear;
    p.params_ = {a, b};
    return p;
}

DensityProfile DensityProfile::exponential(double a, double b) {
    DensityProfile p;
    p.kind_ = ProfileKind::Exponential;
    p.params_ = {a, b};
    return p;
}

DensityProfile DensityProfile::tanh(double a, double b, double c, double w) {
    if (!(w > 0.0)) throw std::invalid_argument("tanh profile: width must be > 0");
    DensityProfile p;
    p.kind_ = ProfileKind::Tanh;
    p.params_ = {a, b, c, w};
    return p;
}

DensityProfile DensityProfile::tabulated(std::vector<double> z, std::vector<double> rho, std::string source) {
    if (z.size() != rho.size()) throw std::invalid_argument("tabulated profile: column lengths differ");
    if (z.size() < 4) throw std::invalid_argument("tabulated profile: need at least 4 samples");
    for (std::size_t i = 1; i < z.size(); ++i)
        if (!(z[i] > z[i - 1])) throw std::invalid_argument("tabulated profile: heights must be strictly increasing");
    DensityProfile p;
    p.kind_ = ProfileKind::Tabulated;
    p.source_ = std::move(source);
    p.table_ = std::make_shared<const Table>(std::move(z), std::move(rho));
    return p;
}

DensityProfile DensityProfile::tabulated_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("tabulated profile: cannot open " + path);
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<double> z;
    std::vector<double> rho;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t eol = std::min(text.find('\n', pos), text.size());
        std::size_t cur = pos;
        std::vector<double> row;
        std::size_t row_start = pos;
        while (cur < eol) {
            const char ch = text[cur];
            if (ch == '#') break;
            if (std::isspace(static_cast<unsigned char>(ch)) || ch == ',') {
                ++cur;
                continue;
            }
            std::size_t end = cur;
            while (end < eol && !std::isspace(static_cast<unsigned char>(text[end])) && text[end] != ',' &&
                   text[end] != '#')
                ++end;
            const std::string token = text.substr(cur, end - cur);
            std::size_t used = 0;
            double value = 0.0;
            try {
                value = std::stod(token, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != token.size() || !std::isfinite(value))
                throw ParseError("tabulated profile " + path + ": malformed number '" + token + "'", cur);
            row.push_back(value);
            cur = end;
        }
        if (!row.empty()) {
            if (row.size() != 2)
                throw ParseError("tabulated profile " + path + ": expected 2 columns, found " +
                                     std::to_string(row.size()),
                                 row_start);
            if (!z.empty() && !(row[0] > z.back()))
                throw ParseError("tabulated profile " + path + ": heights must be strictly increasing", row_start);
            z.push_back(row[0]);
            rho.push_back(row[1]);
        }
        pos = eol + 1;
    }
    if (z.size() < 4) throw ParseError("tabulated profile " + path + ": need at least 4 samples", text.size());
    return tabulated(std::move(z), std::move(rho), path);
}

namespace {

std::vector<double> parse_args(const std::string& spec, const std::string& body, std::size_t expected) {
    std::vector<double> out;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("profile '" + spec + "': bad number '" + item + "'");
        }
        while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
        if (used != item.size()) throw std::invalid_argument("profile '" + spec + "': bad number '" + item + "'");
        out.push_back(v);
    }
    if (out.size() != expected)
        throw std::invalid_argument("profile '" + spec + "': expected " + std::to_string(expected) + " arguments");
    return out;
}

}  // namespace

DensityProfile DensityProfile::parse(const std::string& spec) {
    const auto open = spec.find('(');
    const auto close = spec.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open || close + 1 != spec.size())
        throw std::invalid_argument("profile '" + spec + "': expected name(args)");
    std::string name = spec.substr(0, open);
    name.erase(std::remove_if(name.begin(), name.end(), [](unsigned char c) { return std::isspace(c); }), name.end());
    const std::string body = spec.substr(open + 1, close - open - 1);
    if (name == "linear") {
        const auto a = parse_args(spec, body, 2);
        return linear(a[0], a[1]);
    }
    if (name == "exponential") {
        const auto a = parse_args(spec, body, 2);
        return exponential(a[0], a[1]);
    }
    if (name == "tanh") {
        const auto a = parse_args(spec, body, 4);
        return tanh(a[0], a[1], a[2], a[3]);
    }
    if (name == "tabulated") return tabulated_file(body);
    throw std::invalid_argument("profile '" + spec + "': unknown kind '" + name + "'");
}

std::string DensityProfile::spec() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
        case ProfileKind::Linear: os << "linear(" << params_[0] << "," << params_[1] << ")"; break;
        case ProfileKind::Exponential: os << "exponential(" << params_[0] << "," << params_[1] << ")"; break;
        case ProfileKind::Tanh:
            os << "tanh(" << params_[0] << "," << params_[1] << "," << params_[2] << "," << params_[3] << ")";
            break;
        case ProfileKind::Tabulated: os << "tabulated(" << source_ << ")"; break;
    }
    return os.str();
}

double DensityProfile::rho(double z) const {
    switch (kind_) {
        case ProfileKind::Linear: return params_[0] + params_[1] * z;
        case ProfileKind::Exponential: return params_[0] * std::exp(params_[1] * z);
        case ProfileKind::Tanh: return params_[0] + params_[1] * std::tanh((z - params_[2]) / params_[3]);
        case ProfileKind::Tabulated: {
            const double zc = std::clamp(z, table_->z.front(), table_->z.back());
            return table_->interp(zc);
        }
    }
    return 0.0;
}

double DensityProfile::drho(double z) const {
    switch (kind_) {
        case ProfileKind::Linear: return params_[1];
        case ProfileKind::Exponential: return params_[0] * params_[1] * std::exp(params_[1] * z);
        case ProfileKind::Tanh: {
            const double c = std::cosh((z - params_[2]) / params_[3]);
            return params_[1] / (params_[3] * c * c);
        }
        case ProfileKind::Tabulated: {
            const double zc = std::clamp(z, table_->z.front(), table_->z.back());
            return table_->interp.prime(zc);
        }
    }
    return 0.0;
}

std::optional<double> DensityProfile::d2rho(double z) const {
    switch (kind_) {
        case ProfileKind::Linear: return 0.0;
        case ProfileKind::Exponential: return params_[0] * params_[1] * params_[1] * std::exp(params_[1] * z);
        case ProfileKind::Tanh: {
            const double x = (z - params_[2]) / params_[3];
            const double c = std::cosh(x);
            return -2.0 * params_[1] * std::tanh(x) / (params_[3] * params_[3] * c * c);
        }
        case ProfileKind::Tabulated: return std::nullopt;
    }
    return std::nullopt;
}

DensityProfile::Bounds DensityProfile::bounds(double height) const {
    constexpr int kSamples = 8192;
    std::vector<double> zs;
    zs.reserve(kSamples + 8);
    for (int i = 0; i <= kSamples; ++i) zs.push_back(height * i / kSamples);
    if (kind_ == ProfileKind::Tanh && params_[2] > 0.0 && params_[2] < height) zs.push_back(params_[2]);
    if (kind_ == ProfileKind::Tabulated)
        for (double z : table_->z)
            if (z > 0.0 && z < height) zs.push_back(z);
    Bounds b{rho(0.0), rho(0.0), drho(0.0), drho(0.0), drho(0.0) / rho(0.0)};
    for (double z : zs) {
        const double r = rho(z);
        const double d = drho(z);
        b.rho_min = std::min(b.rho_min, r);
        b.rho_max = std::max(b.rho_max, r);
        b.drho_min = std::min(b.drho_min, d);
        b.drho_max = std::max(b.drho_max, d);
        b.ratio_max = std::max(b.ratio_max, d / r);
    }
    return b;
}

Stratification DensityProfile::classify(double height, double margin) const {
    const Bounds b = bounds(height);
    const double scale = std::max(std::abs(b.drho_min), std::abs(b.drho_max));
    if (scale == 0.0) return Stratification::Indeterminate;
    if (b.drho_min > margin * scale) return Stratification::UniformlyUnstable;
    if (b.drho_max < -margin * scale) return Stratification::Stable;
    if (b.drho_max > 0.0) return Stratification::RtUnstable;
    return Stratification::Indeterminate;
}

void DensityProfile::validate_on(const StaggeredGrid& grid) const {
    const int ga = grid.gravity_axis();
    for (int i = 0; i <= grid.cells(ga); ++i) {
        const double zf = grid.node(ga, i);
        if (!(rho(zf) > 0.0))
            throw PreconditionError("density profile " + spec() + ": rho <= 0 at height " + std::to_string(zf) +
                                    " (inf rho must be positive)");
        if (i < grid.cells(ga)) {
            const double zc = grid.center(ga, i);
            if (!(rho(zc) > 0.0))
                throw PreconditionError("density profile " + spec() + ": rho <= 0 at height " +
                                        std::to_string(zc) + " (inf rho must be positive)");
        }
    }
}

ProfileSamples ProfileSamples::make(const StaggeredGrid& grid, const DensityProfile& profile) {
    profile.validate_on(grid);
    const int ga = grid.gravity_axis();
    ProfileSamples s;
    s.rho = ScalarField(grid);
    s.drho = ScalarField(grid);
    const auto& e = grid.cell_extent();
    for (int k = 0; k < e.n[2]; ++k)
        for (int j = 0; j < e.n[1]; ++j)
            for (int i = 0; i < e.n[0]; ++i) {
                const std::array<int, 3> idx{i, j, k};
                const double z = grid.center(ga, idx[ga]);
                s.rho.at(i, j, k) = profile.rho(z);
                s.drho.at(i, j, k) = profile.drho(z);
            }
    s.face_rho = face_average(s.rho);
    s.rho_min = s.rho.min();
    s.drho_abs_max = std::max(std::abs(s.drho.min()), std::abs(s.drho.max()));
    s.ratio_max = s.drho[0] / s.rho[0];
    for (std::size_t n = 0; n < s.rho.size(); ++n) s.ratio_max = std::max(s.ratio_max, s.drho[n] / s.rho[n]);
    return s;
}

}  // namespace rtspectra
