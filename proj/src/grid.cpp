#include "rtspectra/grid.hpp"

#include <sstream>
#include <stdexcept>

#include "rtspectra/errors.hpp"

namespace rtspectra {

void BoxDomain::validate() const {
    if (dim != 2 && dim != 3) throw std::invalid_argument("box domain: dim must be 2 or 3");
    for (int a = 0; a < dim; ++a) {
        if (!(lengths[a] > 0.0)) throw std::invalid_argument("box domain: lengths must be > 0");
    }
    if (gravity_axis < 0 || gravity_axis >= dim)
        throw std::invalid_argument("box domain: gravity_axis must be < dim");
}

double BoxDomain::volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= lengths[a];
    return v;
}

StaggeredGrid::StaggeredGrid(BoxDomain domain, std::array<int, 3> cells) : domain_(domain) {
    domain_.validate();
    for (int a = 0; a < 3; ++a) {
        if (a < domain_.dim) {
            if (cells[a] < 4) throw std::invalid_argument("staggered grid: need at least 4 cells per axis");
            cells_.n[a] = cells[a];
            h_[a] = domain_.lengths[a] / cells[a];
        } else {
            cells_.n[a] = 1;
            h_[a] = 1.0;
            domain_.lengths[a] = 1.0;
        }
    }
    for (int a = 0; a < 3; ++a) {
        faces_[a] = cells_;
        if (a < domain_.dim) faces_[a].n[a] += 1;
    }
    cell_volume_ = 1.0;
    for (int a = 0; a < domain_.dim; ++a) cell_volume_ *= h_[a];
}

StaggeredGrid StaggeredGrid::unit_box(int dim, int n) {
    BoxDomain d;
    d.dim = dim;
    d.gravity_axis = dim - 1;
    return StaggeredGrid(d, {n, n, dim == 3 ? n : 1});
}

std::string StaggeredGrid::describe() const {
    std::ostringstream os;
    for (int a = 0; a < dim(); ++a) {
        if (a) os << 'x';
        os << cells_.n[a];
    }
    return os.str();
}

void require_same_grid(const StaggeredGrid& a, const StaggeredGrid& b, const char* what) {
    if (!(a == b)) throw GridMismatch(std::string(what) + ": grid mismatch (" + a.describe() + " vs " + b.describe() + ")");
}

}  // namespace rtspectra
