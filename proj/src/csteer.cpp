#include "covsteer/csteer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace covsteer {

namespace {

// Phi_A(0, tau_j) and Ghat(tau_j, 0) on every grid node. Ghat(t,0) accumulates as
// the cumulative trapezoid of Phi_A(0,tau) B B^T Phi_A(0,tau)^T.
struct PrefixTables {
    std::vector<Mat> phi_0t;
    std::vector<Mat> ghat;
};

PrefixTables prefix_tables(const ContinuousLtvSystem& sys) {
    const int ng = sys.grid();
    const double h = sys.dt();
    const Eigen::Index n = sys.n();
    const std::vector<Mat> steps = detail::interval_transitions(sys);

    PrefixTables tab;
    tab.phi_0t.assign(ng + 1, Mat());
    tab.ghat.assign(ng + 1, Mat());
    tab.phi_0t[0] = Mat::Identity(n, n);
    tab.ghat[0] = Mat::Zero(n, n);
    Mat integrand_prev = sys.B_node(0) * sys.B_node(0).transpose();
    for (int j = 0; j < ng; ++j) {
        tab.phi_0t[j + 1] = tab.phi_0t[j] * steps[j].partialPivLu().inverse();
        const Mat col = tab.phi_0t[j + 1] * sys.B_node(j + 1);
        const Mat integrand = col * col.transpose();
        tab.ghat[j + 1] = tab.ghat[j] + 0.5 * h * (integrand_prev + integrand);
        tab.ghat[j + 1] = 0.5 * (tab.ghat[j + 1] + tab.ghat[j + 1].transpose());
        integrand_prev = integrand;
    }
    return tab;
}

double min_real_eig(const Mat& m) {
    Eigen::EigenSolver<Mat> es(m, /*computeEigenvectors=*/false);
    return es.eigenvalues().real().minCoeff();
}

// Largest eigenvalue of Ghat^{1/2} Pi0 Ghat^{1/2}; admissibility means < 1.
double spectral_margin(const Mat& ghat, const Mat& pi0) {
    const Mat root = psd_sqrt(ghat, 1e-8);
    Eigen::SelfAdjointEigenSolver<Mat> es(root * pi0 * root, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

Mat interp_nodes(const std::vector<Mat>& samples, double t, double T, int grid) {
    const double pos = std::clamp(t, 0.0, T) / (T / grid);
    const int j = std::min(static_cast<int>(pos), grid - 1);
    const double w = pos - j;
    return (1.0 - w) * samples[static_cast<size_t>(j)] + w * samples[static_cast<size_t>(j) + 1];
}

}  // namespace

RiccatiSolution::RiccatiSolution(const ContinuousLtvSystem& sys, const SymMatrix& pi0)
    : pi0_(pi0), T_(sys.T()), grid_(sys.grid()) {
    if (!riccati_exists(sys, pi0)) {
        throw std::runtime_error("RiccatiSolution: no solution on [0, T]; I - Ghat(T,0) Pi(0) has "
                                 "eigenvalue " +
                                 std::to_string(min_real_eig(
                                     Mat::Identity(sys.n(), sys.n()) -
                                     gramians_c(sys, sys.T(), 0.0).Ghat.mat() * pi0.mat())));
    }
    PrefixTables tab = prefix_tables(sys);
    ghat_ = std::move(tab.ghat);
    phi_0t_ = std::move(tab.phi_0t);
}

Mat RiccatiSolution::at(double t) const {
    const Mat ghat = interp_nodes(ghat_, t, T_, grid_);
    const Mat phi0t = interp_nodes(phi_0t_, t, T_, grid_);
    const Eigen::Index n = phi0t.rows();
    const Mat m = Mat::Identity(n, n) - ghat * pi0_.mat();
    const Mat pi = phi0t.transpose() * pi0_.mat() * m.partialPivLu().solve(phi0t);
    return 0.5 * (pi + pi.transpose());
}

bool riccati_exists(const ContinuousLtvSystem& sys, const SymMatrix& pi0, double tol) {
    const Mat ghat = gramians_c(sys, sys.T(), 0.0).Ghat.mat();
    const Eigen::Index n = sys.n();
    const double margin_spec = min_real_eig(Mat::Identity(n, n) - ghat * pi0.mat());
    const double margin_contr = 1.0 - spectral_margin(ghat, pi0.mat());
    // Same spectrum along two routes; they may only differ by eigensolver noise.
    if (std::abs(margin_spec - margin_contr) > 1e-6 * (1.0 + std::abs(margin_spec))) {
        throw std::runtime_error("riccati_exists: spectral and contraction tests disagree");
    }
    return margin_spec > tol;
}

SymMatrix riccati_solve(const ContinuousLtvSystem& sys, const SymMatrix& pi0, double t) {
    if (!riccati_exists(sys, pi0)) {
        const Mat ghat = gramians_c(sys, sys.T(), 0.0).Ghat.mat();
        throw std::runtime_error(
            "riccati_solve: no solution; I - Ghat(T,0) Pi(0) has eigenvalue " +
            std::to_string(min_real_eig(Mat::Identity(sys.n(), sys.n()) - ghat * pi0.mat())));
    }
    const Mat ghat_t = gramians_c(sys, t, 0.0).Ghat.mat();
    const Mat phi0t = phi_c(sys, 0.0, t);
    const Mat m = Mat::Identity(sys.n(), sys.n()) - ghat_t * pi0.mat();
    return SymMatrix(phi0t.transpose() * pi0.mat() * m.partialPivLu().solve(phi0t));
}

Mat phi_pi(const ContinuousLtvSystem& sys, const SymMatrix& pi0, double t, double s) {
    if (s > t) throw std::out_of_range("phi_pi: s > t");
    const Mat pis = riccati_solve(sys, pi0, s).mat();
    const Mat ghat_ts = gramians_c(sys, t, s).Ghat.mat();
    return phi_c(sys, t, s) * (Mat::Identity(sys.n(), sys.n()) - ghat_ts * pis);
}

FMapWorkspace make_f_workspace(const ContinuousLtvSystem& sys, const PsdMatrix& sigma0,
                               const SymMatrix& pi0) {
    const Eigen::Index n = sys.n();
    const int ng = sys.grid();
    const Mat id = Mat::Identity(n, n);
    const PrefixTables tab = prefix_tables(sys);

    FMapWorkspace ws;
    ws.h = sys.dt();
    ws.Q.resize(ng + 1);
    ws.Unoise.resize(ng + 1);
    for (int j = 0; j <= ng; ++j) {
        const Mat m = id - tab.ghat[j] * pi0.mat();
        Eigen::PartialPivLU<Mat> lu(m);
        {
            Eigen::JacobiSVD<Mat> svd(m);
            const double smin = svd.singularValues().minCoeff();
            const double smax = svd.singularValues().maxCoeff();
            if (smin <= 0.0 || smax / smin >= 1e12) {
                throw std::runtime_error("f_map: I - Ghat Pi0 ill-conditioned at node " +
                                         std::to_string(j));
            }
        }
        Mat q = lu.solve(tab.ghat[j]);
        ws.Q[j] = 0.5 * (q + q.transpose());
        const Mat phid = tab.phi_0t[j] * sys.D_node(j);
        Mat u = lu.solve(phid);
        u = u * u.transpose();
        // (I - Ghat Pi0)^{-1} X (I - Pi0 Ghat)^{-1} with X = phid phid^T
        ws.Unoise[j] = 0.5 * (u + u.transpose());
    }

    const Mat m_T = id - tab.ghat[ng] * pi0.mat();
    const Mat phi_T0 = tab.phi_0t[ng].partialPivLu().inverse();
    ws.phi_pi_T = phi_T0 * m_T;

    Mat inner = sigma0.mat();
    for (int j = 0; j <= ng; ++j) {
        const double w = (j == 0 || j == ng) ? 0.5 : 1.0;
        inner += w * ws.h * ws.Unoise[j];
    }
    Mat f = phi_T0 * m_T * inner * m_T.transpose() * phi_T0.transpose();
    ws.f_value = 0.5 * (f + f.transpose());
    return ws;
}

PsdMatrix f_map(const ContinuousLtvSystem& sys, const PsdMatrix& sigma0, const SymMatrix& pi0) {
    return PsdMatrix(make_f_workspace(sys, sigma0, pi0).f_value, 1e-8);
}

namespace {

Mat assemble_jacobian(const FMapWorkspace& ws, const Mat& sigma0) {
    const int ng = static_cast<int>(ws.Q.size()) - 1;
    const Mat& qT = ws.Q[static_cast<size_t>(ng)];

    Mat bracket = Eigen::kroneckerProduct(sigma0, qT) + Eigen::kroneckerProduct(qT, sigma0);
    for (int j = 0; j <= ng; ++j) {
        const double w = (j == 0 || j == ng) ? 0.5 : 1.0;
        const Mat dq = qT - ws.Q[static_cast<size_t>(j)];
        bracket += w * ws.h *
                   (Mat(Eigen::kroneckerProduct(ws.Unoise[static_cast<size_t>(j)], dq)) +
                    Mat(Eigen::kroneckerProduct(dq, ws.Unoise[static_cast<size_t>(j)])));
    }
    return -Eigen::kroneckerProduct(ws.phi_pi_T, ws.phi_pi_T) * bracket;
}

}  // namespace

Mat f_jacobian(const ContinuousLtvSystem& sys, const PsdMatrix& sigma0, const SymMatrix& pi0) {
    return assemble_jacobian(make_f_workspace(sys, sigma0, pi0), sigma0.mat());
}

Mat duplication_matrix(Eigen::Index n) {
    const Eigen::Index nv = n * (n + 1) / 2;
    Mat dup = Mat::Zero(n * n, nv);
    Eigen::Index col = 0;
    for (Eigen::Index c = 0; c < n; ++c) {
        for (Eigen::Index r = c; r < n; ++r) {
            dup(r + c * n, col) = 1.0;
            dup(c + r * n, col) = 1.0;
            ++col;
        }
    }
    return dup;
}

Vec vech(const Mat& s) {
    const Eigen::Index n = s.rows();
    Vec v(n * (n + 1) / 2);
    Eigen::Index k = 0;
    for (Eigen::Index c = 0; c < n; ++c) {
        for (Eigen::Index r = c; r < n; ++r) {
            v[k++] = s(r, c);
        }
    }
    return v;
}

Mat unvech(const Vec& v, Eigen::Index n) {
    Mat s(n, n);
    Eigen::Index k = 0;
    for (Eigen::Index c = 0; c < n; ++c) {
        for (Eigen::Index r = c; r < n; ++r) {
            s(r, c) = v[k];
            s(c, r) = v[k];
            ++k;
        }
    }
    return s;
}

ContinuousSteeringLaw steer_min_energy(const ContinuousLtvSystem& sys, const PsdMatrix& sigma0,
                                       const PsdMatrix& sigmaT, const NewtonConfig& cfg) {
    const ContControllabilityVerdict ctrl = cov_controllable_c(sys);
    if (!ctrl.controllable) {
        throw std::invalid_argument(
            "steer_min_energy: state covariance is not controllable on [0, T]");
    }
    const Eigen::Index n = sys.n();
    const Mat ghat_T = gramians_c(sys, sys.T(), 0.0).Ghat.mat();
    const Mat dup = duplication_matrix(n);
    const Mat elim = pinv(dup);

    constexpr double kMargin = 1e-10;
    Mat pi = Mat::Zero(n, n);
    FMapWorkspace ws = make_f_workspace(sys, sigma0, SymMatrix(pi));
    double resid = (ws.f_value - sigmaT.mat()).norm();

    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        if (resid <= cfg.tol) {
            return ContinuousSteeringLaw(sys, RiccatiSolution(sys, SymMatrix(pi)));
        }
        const Mat jac = elim * assemble_jacobian(ws, sigma0.mat()) * dup;
        const Vec rhs = vech(ws.f_value - sigmaT.mat());
        const Vec step = jac.fullPivLu().solve(-rhs);

        double alpha = 1.0;
        bool accepted = false;
        while (alpha > 1e-14) {
            const Mat cand = pi + alpha * unvech(step, n);
            if (spectral_margin(ghat_T, cand) < 1.0 - kMargin) {
                bool ok = true;
                FMapWorkspace cand_ws;
                try {
                    cand_ws = make_f_workspace(sys, sigma0, SymMatrix(cand));
                } catch (const std::runtime_error&) {
                    ok = false;
                }
                if (ok) {
                    const double cand_resid = (cand_ws.f_value - sigmaT.mat()).norm();
                    if (cand_resid < resid) {
                        pi = cand;
                        ws = std::move(cand_ws);
                        resid = cand_resid;
                        accepted = true;
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            throw std::runtime_error("steer_min_energy: Newton stagnated; residual " +
                                     std::to_string(resid));
        }
    }
    if (resid <= cfg.tol) {
        return ContinuousSteeringLaw(sys, RiccatiSolution(sys, SymMatrix(pi)));
    }
    throw std::runtime_error("steer_min_energy: no convergence after " +
                             std::to_string(cfg.max_iter) + " iterations; residual " +
                             std::to_string(resid));
}

}  // namespace covsteer
