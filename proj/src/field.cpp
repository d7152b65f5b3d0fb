#include "rtspectra/field.hpp"

#include <algorithm>
#include <cmath>

#include "rtspectra/errors.hpp"
#include "rtspectra/kernels.hpp"

namespace rtspectra {

ScalarField ScalarField::sample(const StaggeredGrid& grid, const std::function<double(double, double, double)>& f) {
    ScalarField s(grid);
    const auto& e = grid.cell_extent();
    for (int k = 0; k < e.n[2]; ++k)
        for (int j = 0; j < e.n[1]; ++j)
            for (int i = 0; i < e.n[0]; ++i) {
                const double x0 = grid.center(0, i);
                const double x1 = grid.center(1, j);
                const double x2 = grid.dim() == 3 ? grid.center(2, k) : 0.0;
                s.at(i, j, k) = f(x0, x1, x2);
            }
    return s;
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_, "scalar +=");
    for (std::size_t n = 0; n < values_.size(); ++n) values_[n] += o.values_[n];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_, "scalar -=");
    for (std::size_t n = 0; n < values_.size(); ++n) values_[n] -= o.values_[n];
    return *this;
}

ScalarField& ScalarField::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

ScalarField& ScalarField::axpy(double s, const ScalarField& o) {
    require_same_grid(grid_, o.grid_, "scalar axpy");
    for (std::size_t n = 0; n < values_.size(); ++n) values_[n] += s * o.values_[n];
    return *this;
}

double ScalarField::min() const { return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end()); }

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double x : values_) m = std::max(m, std::abs(x));
    return m;
}

double ScalarField::mean() const {
    if (values_.empty()) return 0.0;
    return kernels::pairwise_sum(values_) / static_cast<double>(values_.size());
}

double ScalarField::l2_norm() const {
    return std::sqrt(kernels::omp::cell_dot(values_, values_) * grid_.cell_volume());
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

VectorField::VectorField(const StaggeredGrid& grid) : grid_(grid) {
    std::size_t total = 0;
    for (int a = 0; a < 3; ++a) {
        offset_[a] = total;
        if (a < grid.dim()) total += grid.face_extent(a).size();
    }
    data_.assign(total, 0.0);
}

VectorField VectorField::sample(const StaggeredGrid& grid,
                                const std::array<std::function<double(double, double, double)>, 3>& f) {
    VectorField v(grid);
    for (int a = 0; a < grid.dim(); ++a) {
        if (!f[a]) continue;
        const auto& e = grid.face_extent(a);
        for (int k = 0; k < e.n[2]; ++k)
            for (int j = 0; j < e.n[1]; ++j)
                for (int i = 0; i < e.n[0]; ++i) {
                    const std::array<int, 3> idx{i, j, k};
                    std::array<double, 3> x{0.0, 0.0, 0.0};
                    for (int b = 0; b < grid.dim(); ++b) x[b] = (b == a) ? grid.node(b, idx[b]) : grid.center(b, idx[b]);
                    v.at(a, i, j, k) = f[a](x[0], x[1], x[2]);
                }
    }
    return v;
}

void VectorField::enforce_no_slip() {
    for (int a = 0; a < grid_.dim(); ++a) {
        const auto& e = grid_.face_extent(a);
        for (int k = 0; k < e.n[2]; ++k)
            for (int j = 0; j < e.n[1]; ++j)
                for (int i = 0; i < e.n[0]; ++i) {
                    const std::array<int, 3> idx{i, j, k};
                    if (idx[a] == 0 || idx[a] == grid_.cells(a)) at(a, i, j, k) = 0.0;
                }
    }
}

double VectorField::boundary_normal_max() const {
    double m = 0.0;
    for (int a = 0; a < grid_.dim(); ++a) {
        const auto& e = grid_.face_extent(a);
        for (int k = 0; k < e.n[2]; ++k)
            for (int j = 0; j < e.n[1]; ++j)
                for (int i = 0; i < e.n[0]; ++i) {
                    const std::array<int, 3> idx{i, j, k};
                    if (idx[a] == 0 || idx[a] == grid_.cells(a)) m = std::max(m, std::abs(at(a, i, j, k)));
                }
    }
    return m;
}

VectorField& VectorField::operator+=(const VectorField& o) {
    require_same_grid(grid_, o.grid_, "vector +=");
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += o.data_[n];
    return *this;
}

VectorField& VectorField::operator-=(const VectorField& o) {
    require_same_grid(grid_, o.grid_, "vector -=");
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] -= o.data_[n];
    return *this;
}

VectorField& VectorField::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

VectorField& VectorField::axpy(double s, const VectorField& o) {
    require_same_grid(grid_, o.grid_, "vector axpy");
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += s * o.data_[n];
    return *this;
}

double VectorField::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

double VectorField::l2_norm() const { return std::sqrt(kernels::omp::face_dot(*this, *this, nullptr)); }

double VectorField::component_l2_norm(int a) const {
    VectorField only(grid_);
    std::copy(comp(a).begin(), comp(a).end(), only.comp(a).begin());
    return only.l2_norm();
}

VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(double s, VectorField a) { return a *= s; }

}  // namespace rtspectra
