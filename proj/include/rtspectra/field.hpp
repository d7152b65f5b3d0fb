/// @file field.hpp
/// @brief Cell-centered scalar fields and face-centered (MAC) vector fields.
#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "rtspectra/grid.hpp"

namespace rtspectra {

class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const StaggeredGrid& grid, double value = 0.0)
        : grid_(grid), values_(grid.num_cells(), value) {}

    /// Samples f at every cell center. f receives (x0, x1, x2).
    static ScalarField sample(const StaggeredGrid& grid,
                              const std::function<double(double, double, double)>& f);

    const StaggeredGrid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& at(int i, int j, int k = 0) { return values_[grid_.cell_extent().index(i, j, k)]; }
    double at(int i, int j, int k = 0) const { return values_[grid_.cell_extent().index(i, j, k)]; }

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(double s);
    /// this += s * o
    ScalarField& axpy(double s, const ScalarField& o);

    double min() const;
    double max() const;
    double max_abs() const;
    double mean() const;
    /// Unweighted discrete L2 norm (midpoint quadrature).
    double l2_norm() const;

private:
    StaggeredGrid grid_{};
    std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

/// MAC velocity: component `a` is stored on faces normal to axis `a`. All
/// components share one contiguous buffer so the field can be treated as a
/// flat vector by the eigensolver.
class VectorField {
public:
    VectorField() = default;
    explicit VectorField(const StaggeredGrid& grid);

    /// Samples component functions at their face locations.
    static VectorField sample(const StaggeredGrid& grid,
                              const std::array<std::function<double(double, double, double)>, 3>& f);

    const StaggeredGrid& grid() const { return grid_; }
    int dim() const { return grid_.dim(); }

    std::span<double> comp(int a) { return {data_.data() + offset_[a], grid_.face_extent(a).size()}; }
    std::span<const double> comp(int a) const { return {data_.data() + offset_[a], grid_.face_extent(a).size()}; }
    std::span<double> flat() { return data_; }
    std::span<const double> flat() const { return data_; }
    std::size_t flat_size() const { return data_.size(); }
    std::size_t offset(int a) const { return offset_[a]; }

    double& at(int a, int i, int j, int k = 0) { return data_[offset_[a] + grid_.face_extent(a).index(i, j, k)]; }
    double at(int a, int i, int j, int k = 0) const {
        return data_[offset_[a] + grid_.face_extent(a).index(i, j, k)];
    }

    /// Zeroes every face lying on the wall normal to its component.
    void enforce_no_slip();
    /// Largest |value| on wall-normal faces; zero for a no-slip field.
    double boundary_normal_max() const;

    VectorField& operator+=(const VectorField& o);
    VectorField& operator-=(const VectorField& o);
    VectorField& operator*=(double s);
    VectorField& axpy(double s, const VectorField& o);

    double max_abs() const;
    /// Unweighted discrete L2 norm; wall faces carry half weight.
    double l2_norm() const;
    /// L2 norm of a single component (same quadrature as l2_norm).
    double component_l2_norm(int a) const;

private:
    StaggeredGrid grid_{};
    std::array<std::size_t, 3> offset_{0, 0, 0};
    std::vector<double> data_;
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double s, VectorField a);

}  // namespace rtspectra
