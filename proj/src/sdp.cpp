#include "covsteer/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace covsteer {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

struct BlockView {
    Eigen::Index offset;
    Eigen::Index dim;
    Eigen::Index size;
};

std::vector<BlockView> block_views(const std::vector<int>& blocks) {
    std::vector<BlockView> views;
    views.reserve(blocks.size());
    Eigen::Index offset = 0;
    for (int d : blocks) {
        const Eigen::Index sz = svec_dim(d);
        views.push_back({offset, d, sz});
        offset += sz;
    }
    return views;
}

// Largest alpha in (0, 1] with X + alpha * dX staying positive definite;
// computed from the eigenvalues of L^{-1} dX L^{-T}.
double max_step(const Mat& x, const Mat& dx) {
    Eigen::LLT<Mat> llt(x);
    if (llt.info() != Eigen::Success) return 0.0;
    const Mat l = llt.matrixL();
    Mat t = l.triangularView<Eigen::Lower>().solve(dx);
    t = l.triangularView<Eigen::Lower>().solve(Mat(t.transpose()));
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (t + t.transpose()), Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin >= -1e-16) return 1.0;
    return std::min(1.0, -1.0 / lmin);
}

// Nesterov-Todd scaling point W with W S W = X, via Cholesky factors and one SVD.
Mat nt_scaling(const Mat& x, const Mat& s) {
    Eigen::LLT<Mat> lltx(x), llts(s);
    if (lltx.info() != Eigen::Success || llts.info() != Eigen::Success) {
        throw std::runtime_error("nt_scaling: iterate left the cone");
    }
    const Mat lx = lltx.matrixL();
    const Mat ls = llts.matrixL();
    Eigen::JacobiSVD<Mat> svd(ls.transpose() * lx, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Mat v = svd.matrixV();
    Vec lam_inv = svd.singularValues();
    for (Eigen::Index i = 0; i < lam_inv.size(); ++i) {
        lam_inv[i] = 1.0 / std::max(lam_inv[i], 1e-300);
    }
    Mat w = lx * v * lam_inv.asDiagonal() * v.transpose() * lx.transpose();
    return 0.5 * (w + w.transpose());
}

// svec-coordinate matrix of V |-> W V W for one block.
Mat scaling_operator(const Mat& w) {
    const Eigen::Index d = w.rows();
    const Eigen::Index sz = svec_dim(d);
    Mat h(sz, sz);
    Vec e = Vec::Zero(sz);
    for (Eigen::Index j = 0; j < sz; ++j) {
        e[j] = 1.0;
        h.col(j) = svec(w * smat(e, d) * w);
        e[j] = 0.0;
    }
    return 0.5 * (h + h.transpose());
}

}  // namespace

Eigen::Index svec_dim(Eigen::Index d) { return d * (d + 1) / 2; }

Vec svec(const Mat& s) {
    const Eigen::Index d = s.rows();
    Vec v(svec_dim(d));
    Eigen::Index k = 0;
    for (Eigen::Index c = 0; c < d; ++c) {
        v[k++] = s(c, c);
        for (Eigen::Index r = c + 1; r < d; ++r) {
            v[k++] = kSqrt2 * 0.5 * (s(r, c) + s(c, r));
        }
    }
    return v;
}

Mat smat(const Vec& v, Eigen::Index d) {
    Mat s(d, d);
    Eigen::Index k = 0;
    for (Eigen::Index c = 0; c < d; ++c) {
        s(c, c) = v[k++];
        for (Eigen::Index r = c + 1; r < d; ++r) {
            const double value = v[k++] / kSqrt2;
            s(r, c) = value;
            s(c, r) = value;
        }
    }
    return s;
}

void ConicProblem::validate() const {
    Eigen::Index total = 0;
    for (int d : blocks) {
        if (d < 1) throw std::invalid_argument("ConicProblem: block dimension must be positive");
        total += svec_dim(d);
    }
    if (c.size() != total || A.cols() != total || A.rows() != b.size()) {
        throw std::invalid_argument("ConicProblem: inconsistent dimensions");
    }
    if (!A.allFinite() || !b.allFinite() || !c.allFinite()) {
        throw std::invalid_argument("ConicProblem: non-finite data");
    }
}

ConicSolution solve_conic(const ConicProblem& prob, const SolverConfig& cfg) {
    prob.validate();
    const Eigen::Index nvar = prob.num_vars();
    const Eigen::Index neq = prob.num_eqs();
    const std::vector<BlockView> views = block_views(prob.blocks);
    const double nu = static_cast<double>(
        std::accumulate(prob.blocks.begin(), prob.blocks.end(), 0));

    ConicSolution sol;
    sol.x = Vec(nvar);
    sol.s = Vec(nvar);
    sol.y = Vec::Zero(neq);

    // Inconsistent equalities cannot have any solution, conic or not.
    {
        const Vec xls = prob.A.colPivHouseholderQr().solve(prob.b);
        const double resid = (prob.A * xls - prob.b).norm();
        if (resid > cfg.feas_tol * (1.0 + prob.b.norm())) {
            sol.status = SolveStatus::kInfeasible;
            sol.message = "equality system inconsistent; least-squares residual " +
                          std::to_string(resid);
            return sol;
        }
    }

    const double rho = std::max(1.0, prob.b.lpNorm<Eigen::Infinity>());
    const double delta = std::max(1.0, prob.c.lpNorm<Eigen::Infinity>());
    for (const BlockView& bv : views) {
        sol.x.segment(bv.offset, bv.size) = svec(rho * Mat::Identity(bv.dim, bv.dim));
        sol.s.segment(bv.offset, bv.size) = svec(delta * Mat::Identity(bv.dim, bv.dim));
    }

    const double bnorm = 1.0 + prob.b.norm();
    const double cnorm = 1.0 + prob.c.norm();

    auto farkas_infeasible = [&](const Vec& y) -> bool {
        const double by = prob.b.dot(y);
        if (by <= 0.0) return false;
        const Vec yn = y / by;  // b^T yn = 1
        const Vec s_far = -prob.A.transpose() * yn;
        double min_eig = std::numeric_limits<double>::infinity();
        for (const BlockView& bv : views) {
            Eigen::SelfAdjointEigenSolver<Mat> es(smat(s_far.segment(bv.offset, bv.size), bv.dim),
                                                  Eigen::EigenvaluesOnly);
            min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
        }
        return min_eig >= -1e-8 * (1.0 + yn.norm());
    };

    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        const Vec rp = prob.b - prob.A * sol.x;
        const Vec rd = prob.c - prob.A.transpose() * sol.y - sol.s;
        const double mu = sol.x.dot(sol.s) / nu;
        const double obj_p = prob.c.dot(sol.x);
        const double obj_d = prob.b.dot(sol.y);

        sol.rel_primal = rp.norm() / bnorm;
        sol.rel_dual = rd.norm() / cnorm;
        sol.rel_gap = std::abs(obj_p - obj_d) / (1.0 + std::abs(obj_p) + std::abs(obj_d));
        sol.mu = mu;
        sol.objective = obj_p;
        sol.iterations = iter;

        if (cfg.verbose) {
            double farkas_eig = 0.0;
            const double by = prob.b.dot(sol.y);
            if (by > 0.0) {
                const Vec s_far = -prob.A.transpose() * (sol.y / by);
                farkas_eig = std::numeric_limits<double>::infinity();
                for (const BlockView& bv : views) {
                    Eigen::SelfAdjointEigenSolver<Mat> es(
                        smat(s_far.segment(bv.offset, bv.size), bv.dim), Eigen::EigenvaluesOnly);
                    farkas_eig = std::min(farkas_eig, es.eigenvalues().minCoeff());
                }
            }
            std::fprintf(stderr,
                         "iter %3d mu %9.2e rp %9.2e rd %9.2e gap %9.2e |x| %9.2e |y| %9.2e "
                         "b.y %9.2e farkas_eig %9.2e\n",
                         iter, mu, sol.rel_primal, sol.rel_dual, sol.rel_gap, sol.x.norm(),
                         sol.y.norm(), prob.b.dot(sol.y), farkas_eig);
        }

        if (sol.rel_primal <= cfg.tol && sol.rel_dual <= cfg.tol && sol.rel_gap <= cfg.tol) {
            sol.status = SolveStatus::kOptimal;
            return sol;
        }
        if (farkas_infeasible(sol.y)) {
            sol.status = SolveStatus::kInfeasible;
            sol.message = "Farkas dual certificate found";
            return sol;
        }
        if (!sol.x.allFinite() || !sol.s.allFinite() || sol.x.norm() > 1e13) {
            sol.status = SolveStatus::kNumericalError;
            sol.message = "iterates diverged";
            return sol;
        }

        // NT scaling per block and the normal-equations matrix A H A^T.
        Mat h = Mat::Zero(nvar, nvar);
        std::vector<Mat> xblk(views.size()), sblk(views.size());
        try {
            for (size_t i = 0; i < views.size(); ++i) {
                const BlockView& bv = views[i];
                xblk[i] = smat(sol.x.segment(bv.offset, bv.size), bv.dim);
                sblk[i] = smat(sol.s.segment(bv.offset, bv.size), bv.dim);
                h.block(bv.offset, bv.offset, bv.size, bv.size) =
                    scaling_operator(nt_scaling(xblk[i], sblk[i]));
            }
        } catch (const std::runtime_error& e) {
            sol.status = SolveStatus::kNumericalError;
            sol.message = e.what();
            return sol;
        }

        Mat m = prob.A * h * prob.A.transpose();
        m.diagonal().array() += 1e-13 * (1.0 + m.diagonal().maxCoeff());
        Eigen::LDLT<Mat> ldlt(m);
        if (ldlt.info() != Eigen::Success) {
            sol.status = SolveStatus::kNumericalError;
            sol.message = "normal equations factorization failed";
            return sol;
        }

        auto solve_direction = [&](const Vec& rc, Vec& dx, Vec& dy, Vec& ds) {
            dy = ldlt.solve(rp - prob.A * rc + prob.A * (h * rd));
            ds = rd - prob.A.transpose() * dy;
            dx = rc - h * ds;
        };

        auto cone_step = [&](const Vec& v, const Vec& dv) {
            double alpha = 1.0;
            for (size_t i = 0; i < views.size(); ++i) {
                const BlockView& bv = views[i];
                alpha = std::min(alpha, max_step(smat(v.segment(bv.offset, bv.size), bv.dim),
                                                 smat(dv.segment(bv.offset, bv.size), bv.dim)));
            }
            return alpha;
        };

        // Predictor: pure Newton toward complementarity zero.
        Vec dx_aff, dy_aff, ds_aff;
        solve_direction(-sol.x, dx_aff, dy_aff, ds_aff);
        const double ap_aff = cone_step(sol.x, dx_aff);
        const double ad_aff = cone_step(sol.s, ds_aff);
        const double mu_aff =
            (sol.x + ap_aff * dx_aff).dot(sol.s + ad_aff * ds_aff) / nu;
        const double sigma =
            std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 1e-8, 1.0);

        // Corrector: recenter toward sigma * mu.
        Vec rc(nvar);
        for (size_t i = 0; i < views.size(); ++i) {
            const BlockView& bv = views[i];
            const Mat sinv = sblk[i].llt().solve(Mat::Identity(bv.dim, bv.dim));
            rc.segment(bv.offset, bv.size) = svec(sigma * mu * sinv - xblk[i]);
        }
        Vec dx, dy, ds;
        solve_direction(rc, dx, dy, ds);

        const double ap = std::min(1.0, 0.99 * cone_step(sol.x, dx));
        const double ad = std::min(1.0, 0.99 * cone_step(sol.s, ds));
        sol.x += ap * dx;
        sol.s += ad * ds;
        sol.y += ad * dy;
    }

    sol.status = SolveStatus::kMaxIter;
    sol.message = "no convergence within iteration limit";
    return sol;
}

}  // namespace covsteer
