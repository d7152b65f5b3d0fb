/// @file grid.hpp
/// @brief Box domain and MAC (staggered) grid.
///
/// Layout conventions used throughout the library:
///   - scalars live at cell centers, one value per cell;
///   - velocity component `a` lives on faces normal to axis `a`, so its
///     extent is the cell extent with one extra entry along axis `a`;
///   - arrays are stored axis-0 fastest: idx = i + n0 * (j + n1 * k);
///   - 2D grids carry a unit third extent so every loop is written once.
#pragma once

#include <array>
#include <cstddef>
#include <string>

namespace rtspectra {

/// Per-axis index extent of a 3D-shaped array (unused axes have extent 1).
struct Extent {
    std::array<int, 3> n{1, 1, 1};

    std::size_t size() const {
        return static_cast<std::size_t>(n[0]) * static_cast<std::size_t>(n[1]) *
               static_cast<std::size_t>(n[2]);
    }
    std::size_t index(int i, int j, int k) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(n[0]) *
                   (static_cast<std::size_t>(j) + static_cast<std::size_t>(n[1]) * static_cast<std::size_t>(k));
    }
    /// Linear stride of a unit step along `axis`.
    std::size_t stride(int axis) const {
        if (axis == 0) return 1;
        if (axis == 1) return static_cast<std::size_t>(n[0]);
        return static_cast<std::size_t>(n[0]) * static_cast<std::size_t>(n[1]);
    }
    bool operator==(const Extent&) const = default;
};

struct BoxDomain {
    int dim = 2;
    std::array<double, 3> lengths{1.0, 1.0, 1.0};
    int gravity_axis = 1;

    /// Throws std::invalid_argument on dim not in {2,3}, nonpositive lengths
    /// or a gravity axis outside [0, dim).
    void validate() const;
    double volume() const;
    bool operator==(const BoxDomain&) const = default;
};

class StaggeredGrid {
public:
    StaggeredGrid() = default;
    /// `cells[i]` for i >= dim is ignored. Every active axis needs >= 4 cells.
    StaggeredGrid(BoxDomain domain, std::array<int, 3> cells);

    /// Unit box [0,1]^dim with gravity along the last axis.
    static StaggeredGrid unit_box(int dim, int n);

    const BoxDomain& domain() const { return domain_; }
    int dim() const { return domain_.dim; }
    int gravity_axis() const { return domain_.gravity_axis; }
    int cells(int axis) const { return cells_.n[axis]; }
    double h(int axis) const { return h_[axis]; }
    double length(int axis) const { return domain_.lengths[axis]; }
    /// Cell volume (area in 2D); the midpoint quadrature weight.
    double cell_volume() const { return cell_volume_; }

    const Extent& cell_extent() const { return cells_; }
    const Extent& face_extent(int axis) const { return faces_[axis]; }
    std::size_t num_cells() const { return cells_.size(); }

    /// Coordinate of cell center index `i` along `axis`.
    double center(int axis, int i) const { return (i + 0.5) * h_[axis]; }
    /// Coordinate of face index `i` along `axis` (face 0 sits on the wall).
    double node(int axis, int i) const { return i * h_[axis]; }

    /// "32x32" or "24x24x24" style description.
    std::string describe() const;

    bool operator==(const StaggeredGrid& other) const {
        return domain_ == other.domain_ && cells_ == other.cells_;
    }

private:
    BoxDomain domain_{};
    Extent cells_{};
    std::array<Extent, 3> faces_{};
    std::array<double, 3> h_{1.0, 1.0, 1.0};
    double cell_volume_ = 1.0;
};

/// Throws GridMismatch when the two grids differ.
void require_same_grid(const StaggeredGrid& a, const StaggeredGrid& b, const char* what);

}  // namespace rtspectra
