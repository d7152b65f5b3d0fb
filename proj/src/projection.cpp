#include "rtspectra/projection.hpp"

#include "rtspectra/errors.hpp"
#include "rtspectra/kernels.hpp"

namespace rtspectra {

Projector::Projector(const StaggeredGrid& grid, double tol) : poisson_(grid, tol) {}

void Projector::set_density(const VectorField& face_density) {
    VectorField beta = face_density;
    for (double& b : beta.flat()) b = 1.0 / b;
    poisson_.set_coefficient(std::move(beta));
}

void Projector::clear_density() { poisson_.set_coefficient(std::nullopt); }

void Projector::project_in_place(VectorField& v, ScalarField* potential) const {
    require_same_grid(poisson_.grid(), v.grid(), "leray_project");
    if (v.boundary_normal_max() > 0.0) throw PreconditionError("leray_project: wall-normal faces must be zero");
    ScalarField d(v.grid());
    kernels::omp::divergence(v, d);
    const ScalarField phi = poisson_.solve(d);
    v -= poisson_.flux(phi);
    if (potential) *potential = phi;
}

VectorField Projector::project(const VectorField& v, ScalarField* potential) const {
    VectorField out = v;
    project_in_place(out, potential);
    return out;
}

VectorField leray_project(const VectorField& v, double tol) { return Projector(v.grid(), tol).project(v); }

}  // namespace rtspectra
