#include "dense_oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace oracle {

Assembly assemble(const Box& box, const std::function<double(double)>& rho, const std::function<double(double)>& drho) {
    Assembly as;
    as.box = box;
    const int dim = box.dim;
    const auto& n = box.n;
    as.cells = n[0] * n[1] * n[2];
    auto cell = [&](int i, int j, int k) { return i + n[0] * (j + n[1] * k); };

    // enumerate interior faces component by component
    std::vector<std::vector<int>> table(3);
    std::array<std::array<int, 3>, 3> fext{};
    int count = 0;
    for (int a = 0; a < dim; ++a) {
        fext[a] = n;
        fext[a][a] += 1;
        table[a].assign(static_cast<std::size_t>(fext[a][0] * fext[a][1] * fext[a][2]), -1);
        for (int k = 0; k < fext[a][2]; ++k)
            for (int j = 0; j < fext[a][1]; ++j)
                for (int i = 0; i < fext[a][0]; ++i) {
                    const int m = a == 0 ? i : (a == 1 ? j : k);
                    if (m == 0 || m == n[a]) continue;
                    table[a][static_cast<std::size_t>(i + fext[a][0] * (j + fext[a][1] * k))] = count++;
                }
    }
    as.unknowns = count;
    as.face_index = [table, fext](int a, int i, int j, int k) {
        if (i < 0 || j < 0 || k < 0 || i >= fext[a][0] || j >= fext[a][1] || k >= fext[a][2]) return -1;
        return table[a][static_cast<std::size_t>(i + fext[a][0] * (j + fext[a][1] * k))];
    };
    const auto& fi = as.face_index;

    as.div = Eigen::MatrixXd::Zero(as.cells, count);
    as.avg = Eigen::MatrixXd::Zero(as.cells, count);
    as.rho.resize(as.cells);
    as.drho.resize(as.cells);
    const int ga = box.gravity;
    for (int k = 0; k < n[2]; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i) {
                const int c = cell(i, j, k);
                const std::array<int, 3> idx{i, j, k};
                const double z = (idx[ga] + 0.5) * box.h(ga);
                as.rho(c) = rho(z);
                as.drho(c) = drho(z);
                for (int a = 0; a < dim; ++a) {
                    std::array<int, 3> hi = idx;
                    hi[a] += 1;
                    const int f_hi = fi(a, hi[0], hi[1], hi[2]);
                    const int f_lo = fi(a, i, j, k);
                    if (f_hi >= 0) as.div(c, f_hi) += 1.0 / box.h(a);
                    if (f_lo >= 0) as.div(c, f_lo) -= 1.0 / box.h(a);
                    if (a == ga) {
                        if (f_hi >= 0) as.avg(c, f_hi) += 0.5;
                        if (f_lo >= 0) as.avg(c, f_lo) += 0.5;
                    }
                }
            }

    as.lap = Eigen::MatrixXd::Zero(count, count);
    as.face_rho.resize(count);
    for (int a = 0; a < dim; ++a)
        for (int k = 0; k < fext[a][2]; ++k)
            for (int j = 0; j < fext[a][1]; ++j)
                for (int i = 0; i < fext[a][0]; ++i) {
                    const int row = fi(a, i, j, k);
                    if (row < 0) continue;
                    const std::array<int, 3> idx{i, j, k};
                    // face density: mean of the two cells sharing the face
                    std::array<int, 3> lo = idx;
                    lo[a] -= 1;
                    as.face_rho(row) = 0.5 * (as.rho(cell(i, j, k)) + as.rho(cell(lo[0], lo[1], lo[2])));
                    for (int b = 0; b < dim; ++b) {
                        const double w = 1.0 / (box.h(b) * box.h(b));
                        as.lap(row, row) -= 2.0 * w;
                        for (int step : {-1, 1}) {
                            std::array<int, 3> nb = idx;
                            nb[b] += step;
                            if (b == a) {
                                const int col = fi(a, nb[0], nb[1], nb[2]);
                                if (col >= 0) as.lap(row, col) += w;  // wall-normal neighbour is zero
                            } else if (nb[b] < 0 || nb[b] >= n[b]) {
                                as.lap(row, row) -= w;  // reflected ghost
                            } else {
                                as.lap(row, fi(a, nb[0], nb[1], nb[2])) += w;
                            }
                        }
                    }
                }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(as.div, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double tol = 1e-10 * sv(0);
    int rank = 0;
    for (int r = 0; r < sv.size(); ++r)
        if (sv(r) > tol) ++rank;
    as.basis = svd.matrixV().rightCols(count - rank);
    return as;
}

double alpha(const Assembly& as, double s, double mu, double g) {
    const Eigen::MatrixXd a =
        g * as.avg.transpose() * as.drho.asDiagonal() * as.avg + s * mu * as.lap;
    const Eigen::MatrixXd& z = as.basis;
    Eigen::MatrixXd ar = z.transpose() * a * z;
    Eigen::MatrixXd mr = z.transpose() * as.face_rho.asDiagonal() * z;
    ar = 0.5 * (ar + ar.transpose()).eval();
    mr = 0.5 * (mr + mr.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(ar, mr, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(es.eigenvalues().size() - 1);
}

double stokes_lambda1(const Assembly& as) {
    const Eigen::MatrixXd& z = as.basis;
    Eigen::MatrixXd k = -(z.transpose() * as.lap * z);
    k = 0.5 * (k + k.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

double lambda_n(const Assembly& as, double mu, double g) {
    const Eigen::MatrixXd& z = as.basis;
    const int nc = as.cells;
    const int nz = static_cast<int>(z.cols());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nc + nz, nc + nz);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nc + nz, nc + nz);
    const Eigen::MatrixXd az = as.avg * z;
    a.topRightCorner(nc, nz) = -az;
    a.bottomLeftCorner(nz, nc) = -az.transpose();
    a.bottomRightCorner(nz, nz) = (mu / g) * z.transpose() * as.lap * z;
    m.topLeftCorner(nc, nc) = as.drho.cwiseInverse().asDiagonal();
    m.bottomRightCorner(nz, nz) = z.transpose() * as.face_rho.asDiagonal() * z / g;
    a = 0.5 * (a + a.transpose()).eval();
    m = 0.5 * (m + m.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(a, m, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(es.eigenvalues().size() - 1);
}

double tabulated_fixed_point(const Assembly& as, double mu, double g, double s_max, int points) {
    double s_prev = 0.0;
    double phi_prev = -alpha(as, 0.0, mu, g);
    if (phi_prev >= 0.0) throw std::runtime_error("oracle: no instability");
    for (int i = 1; i < points; ++i) {
        const double s = s_max * i / (points - 1);
        const double phi = s * s - alpha(as, s, mu, g);
        if (phi >= 0.0) return s_prev + (s - s_prev) * (-phi_prev) / (phi - phi_prev);
        s_prev = s;
        phi_prev = phi;
    }
    throw std::runtime_error("oracle: no sign change in range");
}

}  // namespace oracle
