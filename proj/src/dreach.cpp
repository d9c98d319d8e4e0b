#include "covsteer/dreach.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace covsteer {

namespace {

// Positive definiteness at the same scale-aware threshold used for rank decisions.
bool is_pd(const Mat& m, double rank_tol) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    const double lmax = es.eigenvalues().maxCoeff();
    const double thr = rank_tol * std::max(1.0, lmax) * static_cast<double>(m.rows());
    return es.eigenvalues().minCoeff() > thr;
}

bool all_a_invertible(const DiscreteLtvSystem& sys, int k) {
    for (int j = 0; j < k; ++j) {
        Eigen::JacobiSVD<Mat> svd(sys.A(j));
        const Vec& sv = svd.singularValues();
        if (sv.minCoeff() <= 0.0 || sv.maxCoeff() / sv.minCoeff() >= 1e12) return false;
    }
    return true;
}

}  // namespace

ReachabilityCertificate reach_set_description(const DiscreteLtvSystem& sys, const PsdMatrix& sigma0,
                                              int k, double rank_tol) {
    if (k < 1) {
        throw std::out_of_range("reach_set_description: k must be >= 1");
    }
    ReachabilityCertificate cert;
    cert.k = k;
    cert.eq_tol = 1e-8;
    cert.psd_tol = 1e-8;

    // Noise tail sums T_i = sum_{j=i}^{k} Phi_A(k,j) D_{j-1} D_{j-1}^T Phi_A(k,j)^T,
    // accumulated from i = k down to 1.
    std::vector<Mat> tails(static_cast<size_t>(k) + 1);
    Mat tail = Mat::Zero(sys.n(), sys.n());
    for (int i = k; i >= 1; --i) {
        const Mat phi_ki = phi(sys, k, i);
        tail += phi_ki * sys.D(i - 1) * sys.D(i - 1).transpose() * phi_ki.transpose();
        tails[static_cast<size_t>(i)] = tail;
    }

    const Mat phi_k0 = phi(sys, k, 0);
    const Mat eq_target = phi_k0 * sigma0.mat() * phi_k0.transpose() + tail;
    cert.constraints.push_back({0, range_projector(reach_gramian(sys, k, 0).mat(),
                                                   RangePart::kComplement, rank_tol),
                                SymMatrix(eq_target), ConstraintKind::kEquality});
    for (int i = 1; i <= k; ++i) {
        cert.constraints.push_back({i, range_projector(reach_gramian(sys, k, i).mat(),
                                                       RangePart::kComplement, rank_tol),
                                    SymMatrix(tails[static_cast<size_t>(i)]),
                                    ConstraintKind::kPsdInequality});
    }
    return cert;
}

std::vector<ConstraintViolation> constraint_residuals(const ReachabilityCertificate& cert,
                                                      const SymMatrix& sigmaK) {
    std::vector<ConstraintViolation> out;
    const Mat& sigma = sigmaK.mat();
    for (const ReachConstraint& c : cert.constraints) {
        const Mat& pr = c.projector.mat();
        const Mat lhs = pr * sigma * pr;
        const Mat rhs = pr * c.target.mat() * pr;
        if (c.kind == ConstraintKind::kEquality) {
            out.push_back({c.i, c.kind, (lhs - rhs).norm()});
        } else {
            Eigen::SelfAdjointEigenSolver<Mat> es(lhs - rhs, Eigen::EigenvaluesOnly);
            out.push_back({c.i, c.kind, std::max(0.0, -es.eigenvalues().minCoeff())});
        }
    }
    return out;
}

ReachabilityVerdict check_membership(const ReachabilityCertificate& cert, const SymMatrix& sigmaK,
                                     double tol) {
    ReachabilityVerdict verdict;
    const Mat& sigma = sigmaK.mat();

    if (!is_psd(sigma, cert.psd_tol)) {
        Eigen::SelfAdjointEigenSolver<Mat> es(sigma, Eigen::EigenvaluesOnly);
        verdict.violations.push_back({-1, ConstraintKind::kPsdInequality, -es.eigenvalues().minCoeff()});
    }

    for (const ReachConstraint& c : cert.constraints) {
        const Mat& pr = c.projector.mat();
        const Mat lhs = pr * sigma * pr;
        const Mat rhs = pr * c.target.mat() * pr;
        if (c.kind == ConstraintKind::kEquality) {
            const double resid = (lhs - rhs).norm();
            if (resid > tol * (1.0 + c.target.mat().norm())) {
                verdict.violations.push_back({c.i, c.kind, resid});
            }
        } else {
            const Mat diff = lhs - rhs;
            if (!is_psd(diff, cert.psd_tol)) {
                Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (diff + diff.transpose()),
                                                      Eigen::EigenvaluesOnly);
                verdict.violations.push_back({c.i, c.kind, -es.eigenvalues().minCoeff()});
            }
        }
    }
    verdict.member = verdict.violations.empty();
    return verdict;
}

ReachabilityVerdict is_reachable_cov(const DiscreteLtvSystem& sys, const PsdMatrix& sigma0, int k,
                                     const SymMatrix& sigmaK, double tol) {
    return check_membership(reach_set_description(sys, sigma0, k), sigmaK, tol);
}

ControllabilityVerdict cov_controllable(const DiscreteLtvSystem& sys, int k, double rank_tol) {
    if (k < 1) {
        throw std::out_of_range("cov_controllable: k must be >= 1");
    }
    ControllabilityVerdict verdict;
    verdict.controllable = true;

    if (!is_pd(reach_gramian(sys, k, 0).mat(), rank_tol)) {
        verdict.controllable = false;
        verdict.failure = ControllabilityFailure::kGramianSingular;
        verdict.failed_i = 0;
    } else {
        for (int i = 1; i <= k; ++i) {
            const Mat lhs = phi(sys, k, i) * sys.D(i - 1);
            if (!range_inclusion(lhs, reach_gramian(sys, k, i).mat(), rank_tol)) {
                verdict.controllable = false;
                verdict.failure = ControllabilityFailure::kRangeAtStep;
                verdict.failed_i = i;
                break;
            }
        }
    }

    if (all_a_invertible(sys, k)) {
        bool alt = is_pd(ctrl_gramian(sys, k, 0).mat(), rank_tol);
        if (alt) {
            for (int i = 1; i <= k; ++i) {
                if (!range_inclusion(sys.D(i - 1), ctrl_gramian(sys, k, i).mat(), rank_tol)) {
                    alt = false;
                    break;
                }
            }
        }
        if (alt != verdict.controllable) {
            throw std::runtime_error(
                "cov_controllable: reachability- and controllability-Gramian conditions disagree");
        }
    }
    return verdict;
}

bool mean_reachable(const DiscreteLtvSystem& sys, const Vec& mu0, int k, const Vec& muK, double tol,
                    double rank_tol) {
    if (mu0.size() != sys.n() || muK.size() != sys.n()) {
        throw std::invalid_argument("mean_reachable: vector length must equal n");
    }
    const Projector p = range_projector(reach_gramian(sys, k, 0).mat(), RangePart::kComplement, rank_tol);
    const Vec resid = p.mat() * (muK - phi(sys, k, 0) * mu0);
    return resid.norm() <= tol;
}

}  // namespace covsteer
