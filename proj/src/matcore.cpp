#include "covsteer/matcore.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace covsteer {

bool all_finite(const Mat& m) { return m.allFinite(); }

namespace {

void require_finite(const Mat& m, const char* who) {
    if (!m.allFinite()) {
        throw std::invalid_argument(std::string(who) + ": non-finite entries");
    }
}

void require_square(const Mat& m, const char* who) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument(std::string(who) + ": matrix is not square");
    }
}

double rank_threshold(const Mat& m, double sigma_max, double rank_tol) {
    return rank_tol * sigma_max * static_cast<double>(std::max(m.rows(), m.cols()));
}

}  // namespace

SymMatrix::SymMatrix(const Mat& m) {
    require_finite(m, "SymMatrix");
    require_square(m, "SymMatrix");
    m_ = 0.5 * (m + m.transpose());
}

PsdMatrix::PsdMatrix(const SymMatrix& base, double eig_floor) : base_(base), eig_floor_(eig_floor) {
    if (!is_psd(base_.mat(), eig_floor_)) {
        throw std::invalid_argument("PsdMatrix: matrix is not positive semi-definite");
    }
}

Projector::Projector(const Mat& p) {
    require_finite(p, "Projector");
    require_square(p, "Projector");
    if ((p - p.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw std::invalid_argument("Projector: matrix is not symmetric");
    }
    p_ = 0.5 * (p + p.transpose());
    const double scale = std::max(1.0, p_.norm());
    if ((p_ * p_ - p_).norm() > 1e-10 * scale) {
        throw std::invalid_argument("Projector: matrix is not idempotent");
    }
}

bool is_psd(const Mat& m, double tol) {
    require_finite(m, "is_psd");
    require_square(m, "is_psd");
    if (m.rows() == 0) return true;
    const Mat s = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(s, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    return lmin >= -tol * std::max(1.0, lmax);
}

Mat psd_sqrt(const Mat& m, double tol) {
    require_finite(m, "psd_sqrt");
    require_square(m, "psd_sqrt");
    const Mat s = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(s);
    Vec lam = es.eigenvalues();
    const double lmax = lam.size() > 0 ? lam.maxCoeff() : 0.0;
    const double floor = -tol * std::max(1.0, lmax);
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam[i] < floor) {
            throw std::domain_error("psd_sqrt: matrix has eigenvalue " + std::to_string(lam[i]) +
                                    " below tolerance; not PSD");
        }
        lam[i] = std::sqrt(std::max(lam[i], 0.0));
    }
    Mat r = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
    return 0.5 * (r + r.transpose());
}

PsdMatrix psd_sqrt(const PsdMatrix& m) {
    return PsdMatrix(psd_sqrt(m.mat(), m.eig_floor()), m.eig_floor());
}

Mat pinv(const Mat& m, double rank_tol) {
    require_finite(m, "pinv");
    if (m.size() == 0) return m.transpose();
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv.maxCoeff() : 0.0;
    const double thr = rank_threshold(m, smax, rank_tol);
    Vec inv = Vec::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv[i] > thr) inv[i] = 1.0 / sv[i];
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Projector range_projector(const Mat& m, RangePart onto, double rank_tol) {
    require_finite(m, "range_projector");
    const Eigen::Index n = m.rows();
    Mat p = Mat::Zero(n, n);
    if (m.size() > 0) {
        Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU);
        const Vec& sv = svd.singularValues();
        const double smax = sv.size() > 0 ? sv.maxCoeff() : 0.0;
        const double thr = rank_threshold(m, smax, rank_tol);
        Eigen::Index rank = 0;
        while (rank < sv.size() && sv[rank] > thr) ++rank;
        if (rank > 0) {
            const Mat z = svd.matrixU().leftCols(rank);
            p = z * z.transpose();
        }
    }
    if (onto == RangePart::kComplement) {
        p = Mat::Identity(n, n) - p;
    }
    return Projector(0.5 * (p + p.transpose()));
}

bool range_inclusion(const Mat& m2, const Mat& m1, double rank_tol) {
    if (m2.rows() != m1.rows()) {
        throw std::invalid_argument("range_inclusion: row dimensions differ");
    }
    const Projector pc = range_projector(m1, RangePart::kComplement, rank_tol);
    const double resid = (pc.mat() * m2).norm();
    return resid <= rank_tol * (1.0 + m2.norm());
}

SymMatrix gen_schur(const SymMatrix& m, Eigen::Index split, double rank_tol) {
    const Eigen::Index n = m.dim();
    if (split <= 0 || split >= n) {
        throw std::invalid_argument("gen_schur: split index out of range");
    }
    const Mat& a = m.mat();
    const Mat m1 = a.topLeftCorner(split, split);
    const Mat m2 = a.topRightCorner(split, n - split);
    const Mat m3 = a.bottomRightCorner(n - split, n - split);
    return SymMatrix(m3 - m2.transpose() * pinv(m1, rank_tol) * m2);
}

SymMatrix woodbury_capped(const PsdMatrix& w, const Mat& gamma, double rank_tol) {
    const Mat& wm = w.mat();
    const Eigen::Index m = wm.rows();
    const Eigen::Index l = gamma.cols();
    if (gamma.size() > 0 && gamma.rows() != m) {
        throw std::invalid_argument("woodbury_capped: Gamma row dimension mismatch");
    }
    require_finite(gamma, "woodbury_capped");

    Mat stacked(m, m + l);
    stacked.leftCols(m) = wm;
    if (l > 0) stacked.rightCols(l) = gamma;
    Eigen::JacobiSVD<Mat> svd_full(stacked);
    {
        const Vec& sv = svd_full.singularValues();
        const double smax = sv.size() > 0 ? sv.maxCoeff() : 0.0;
        const double thr = rank_threshold(stacked, smax, rank_tol);
        Eigen::Index rank = 0;
        while (rank < sv.size() && sv[rank] > thr) ++rank;
        if (rank < m) {
            throw std::runtime_error("woodbury_capped: [W Gamma] is rank deficient");
        }
    }

    // Rank of W fixes the block split; the precondition puts W1 > 0 in the leading block.
    Eigen::SelfAdjointEigenSolver<Mat> es(wm, Eigen::EigenvaluesOnly);
    const double lmax = es.eigenvalues().size() > 0 ? es.eigenvalues().maxCoeff() : 0.0;
    const double thr = rank_tol * std::max(1.0, lmax) * static_cast<double>(m);
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        if (es.eigenvalues()[i] > thr) ++r;
    }

    Mat out = Mat::Zero(m, m);
    if (r == 0) return SymMatrix(out);

    const Mat w1 = wm.topLeftCorner(r, r);
    const Mat g1 = l > 0 ? Mat(gamma.topRows(r)) : Mat::Zero(r, 0);
    const Mat g2 = l > 0 ? Mat(gamma.bottomRows(m - r)) : Mat::Zero(m - r, 0);

    Mat p2 = Mat::Identity(l, l);
    if (m - r > 0) {
        p2 -= g2.transpose() * (g2 * g2.transpose()).ldlt().solve(g2);
    }
    Mat core = w1;
    if (l > 0) {
        const Mat inner = Mat::Identity(l, l) + p2 * g1.transpose() * w1.ldlt().solve(g1) * p2;
        core -= g1 * p2 * inner.ldlt().solve(Mat(p2 * g1.transpose()));
    }
    out.topLeftCorner(r, r) = core;
    return SymMatrix(out);
}

}  // namespace covsteer
