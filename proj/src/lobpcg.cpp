#include "rtspectra/lobpcg.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "rtspectra/errors.hpp"

namespace rtspectra {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

std::span<double> col(Mat& m, Eigen::Index j) { return {m.col(j).data(), static_cast<std::size_t>(m.rows())}; }

struct Block {
    Mat x, ax, mx;

    Eigen::Index cols() const { return x.cols(); }
};

void apply_ops(const EigenProblem& p, Block& b) {
    b.ax.resize(b.x.rows(), b.x.cols());
    b.mx.resize(b.x.rows(), b.x.cols());
    for (Eigen::Index j = 0; j < b.x.cols(); ++j) {
        p.apply_a(col(b.x, j), col(b.ax, j));
        p.apply_m(col(b.x, j), col(b.mx, j));
    }
}

void project_cols(const EigenProblem& p, Mat& m) {
    if (!p.project) return;
    for (Eigen::Index j = 0; j < m.cols(); ++j) p.project(col(m, j));
}

/// Basis of span(S) that is M-orthonormal, dropping directions whose
/// relative M-norm falls below `drop`. Returns the coefficient matrix Z.
Mat svqb(const Mat& gm, double drop) {
    const Eigen::Index k = gm.rows();
    Vec d(k);
    for (Eigen::Index i = 0; i < k; ++i) d(i) = gm(i, i) > 0.0 ? 1.0 / std::sqrt(gm(i, i)) : 0.0;
    const Mat scaled = d.asDiagonal() * gm * d.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Mat> es(scaled);
    const Vec& ev = es.eigenvalues();
    const double top = ev.maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < k; ++i)
        if (ev(i) > drop * top) keep.push_back(i);
    Mat z(k, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c)
        z.col(static_cast<Eigen::Index>(c)) =
            d.asDiagonal() * es.eigenvectors().col(keep[c]) / std::sqrt(ev(keep[c]));
    return z;
}

/// Rayleigh-Ritz on [x | w | p]; returns coefficients of the top `m` Ritz
/// vectors (descending) and their values.
std::pair<Mat, Vec> rayleigh_ritz(const Mat& s, const Mat& as, const Mat& ms, Eigen::Index m) {
    Mat ga = s.transpose() * as;
    Mat gm = s.transpose() * ms;
    ga = 0.5 * (ga + ga.transpose()).eval();
    gm = 0.5 * (gm + gm.transpose()).eval();
    const Mat z = svqb(gm, 1e-13);
    if (z.cols() < m) throw SolverError("lobpcg: search space collapsed", 0.0);
    Mat h = z.transpose() * ga * z;
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    const Eigen::Index k = h.rows();
    Mat c(s.cols(), m);
    Vec vals(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        vals(j) = es.eigenvalues()(k - 1 - j);
        c.col(j) = z * es.eigenvectors().col(k - 1 - j);
    }
    return {c, vals};
}

}  // namespace

LobpcgResult lobpcg(const EigenProblem& p, const LobpcgOptions& opt, const std::vector<std::vector<double>>& initial) {
    const auto n = static_cast<Eigen::Index>(p.size);
    const Eigen::Index m = opt.block;
    if (m < 1 || 3 * m > n) throw PreconditionError("lobpcg: block size incompatible with problem size");

    Block x;
    x.x.resize(n, m);
    std::minstd_rand rng(static_cast<std::minstd_rand::result_type>(opt.seed % 2147483646u + 1u));
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (Eigen::Index j = 0; j < m; ++j) {
        if (static_cast<std::size_t>(j) < initial.size() && initial[j].size() == p.size)
            x.x.col(j) = Eigen::Map<const Vec>(initial[j].data(), n);
        else
            for (Eigen::Index i = 0; i < n; ++i) x.x(i, j) = uni(rng);
    }
    project_cols(p, x.x);
    apply_ops(p, x);
    {
        auto [c, vals] = rayleigh_ritz(x.x, x.ax, x.mx, m);
        x.x = x.x * c;
        x.ax = x.ax * c;
        x.mx = x.mx * c;
    }
    Vec lambda(m);
    for (Eigen::Index j = 0; j < m; ++j) lambda(j) = x.x.col(j).dot(x.ax.col(j));

    Block w;
    Block dir;
    bool have_dir = false;
    LobpcgResult res;
    Vec rel(m);
    for (int it = 0; it <= opt.max_iterations; ++it) {
        Mat r = x.ax - x.mx * lambda.asDiagonal();
        project_cols(p, r);
        for (Eigen::Index j = 0; j < m; ++j) {
            const double scale = (p.norm_a + std::abs(lambda(j)) * p.norm_m) * x.x.col(j).norm();
            rel(j) = r.col(j).norm() / scale;
        }
        res.iterations = it;
        if (rel(0) <= opt.tol) {
            res.converged = true;
            break;
        }
        if (it == opt.max_iterations) break;

        w.x.resize(n, m);
        for (Eigen::Index j = 0; j < m; ++j) {
            if (p.precond)
                p.precond(col(r, j), col(w.x, j));
            else
                w.x.col(j) = r.col(j);
        }
        project_cols(p, w.x);
        // keep the new directions M-orthogonal to the current block
        w.x -= x.x * (x.mx.transpose() * w.x);
        apply_ops(p, w);

        const Eigen::Index k = m * (have_dir ? 3 : 2);
        Mat s(n, k), as(n, k), ms(n, k);
        s << x.x, w.x, (have_dir ? dir.x : Mat(n, 0));
        as << x.ax, w.ax, (have_dir ? dir.ax : Mat(n, 0));
        ms << x.mx, w.mx, (have_dir ? dir.mx : Mat(n, 0));
        auto [c, vals] = rayleigh_ritz(s, as, ms, m);

        const Mat ctail = c.bottomRows(k - m);
        dir.x = s.rightCols(k - m) * ctail;
        dir.ax = as.rightCols(k - m) * ctail;
        dir.mx = ms.rightCols(k - m) * ctail;
        have_dir = true;
        x.x = s * c;
        x.ax = as * c;
        x.mx = ms * c;
        lambda = vals;

        if (opt.reproject_every > 0 && (it + 1) % opt.reproject_every == 0) {
            project_cols(p, x.x);
            apply_ops(p, x);
            auto [c2, v2] = rayleigh_ritz(x.x, x.ax, x.mx, m);
            x.x = x.x * c2;
            x.ax = x.ax * c2;
            x.mx = x.mx * c2;
            lambda = v2;
            have_dir = false;
        }
    }
    if (!res.converged) {
        std::ostringstream os;
        os << "lobpcg: no convergence after " << res.iterations << " iterations (relative residual " << rel(0)
           << ", tolerance " << opt.tol << ")";
        throw SolverError(os.str(), rel(0));
    }
    for (Eigen::Index j = 0; j < m; ++j) {
        const double mn = x.x.col(j).dot(x.mx.col(j));
        res.values.push_back(x.x.col(j).dot(x.ax.col(j)) / mn);
        Vec v = x.x.col(j) / std::sqrt(mn);
        res.vectors.emplace_back(v.data(), v.data() + n);
        res.residuals.push_back(rel(j));
    }
    return res;
}

}  // namespace rtspectra
