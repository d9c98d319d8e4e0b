#pragma once

#include <Eigen/Dense>

namespace covsteer {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Default relative rank tolerance. Singular values sigma <= rank_tol * sigma_max * max(rows, cols)
// are treated as zero. All rank-dependent operations accept an override.
inline constexpr double kRankTol = 1e-9;

// Default eigenvalue floor used by PSD validation.
inline constexpr double kPsdTol = 1e-9;

bool all_finite(const Mat& m);

// Symmetric matrix; stores (M + M^T)/2 so downstream code never sees round-off asymmetry.
class SymMatrix {
  public:
    explicit SymMatrix(const Mat& m);
    const Mat& mat() const { return m_; }
    Eigen::Index dim() const { return m_.rows(); }

  private:
    Mat m_;
};

// Symmetric positive semi-definite matrix. Validation requires every eigenvalue
// >= -eig_floor * max(1, lambda_max).
class PsdMatrix {
  public:
    explicit PsdMatrix(const SymMatrix& base, double eig_floor = kPsdTol);
    explicit PsdMatrix(const Mat& m, double eig_floor = kPsdTol) : PsdMatrix(SymMatrix(m), eig_floor) {}
    const Mat& mat() const { return base_.mat(); }
    Eigen::Index dim() const { return base_.dim(); }
    double eig_floor() const { return eig_floor_; }

  private:
    SymMatrix base_;
    double eig_floor_;
};

// Orthogonal projection matrix: symmetric within 1e-12 and idempotent within
// 1e-10 relative Frobenius norm.
class Projector {
  public:
    explicit Projector(const Mat& p);
    const Mat& mat() const { return p_; }
    Eigen::Index dim() const { return p_.rows(); }

  private:
    Mat p_;
};

// True iff lambda_min(M) >= -tol * max(1, lambda_max(M)). M is symmetrized first.
bool is_psd(const Mat& m, double tol = kPsdTol);

// Symmetric PSD square root R with R*R = M. Eigenvalues below -tol * max(1, lambda_max)
// raise; small negative eigenvalues are clamped to zero.
Mat psd_sqrt(const Mat& m, double tol = kPsdTol);
PsdMatrix psd_sqrt(const PsdMatrix& m);

// Moore-Penrose pseudo-inverse via SVD.
Mat pinv(const Mat& m, double rank_tol = kRankTol);

enum class RangePart { kRange, kComplement };

// Orthogonal projector onto range(M) or its orthogonal complement.
Projector range_projector(const Mat& m, RangePart onto, double rank_tol = kRankTol);

// True iff range(M2) is contained in range(M1):
// ||(I - P_range(M1)) * M2||_F <= rank_tol * (1 + ||M2||_F).
bool range_inclusion(const Mat& m2, const Mat& m1, double rank_tol = kRankTol);

// Generalized Schur complement M3 - M2^T M1^+ M2 of the leading split x split block.
SymMatrix gen_schur(const SymMatrix& m, Eigen::Index split, double rank_tol = kRankTol);

// W (W + Gamma Gamma^T)^{-1} W through the projector closed form, for W psd of rank r
// in block coordinates (leading r x r block positive definite) and rank [W Gamma] full.
SymMatrix woodbury_capped(const PsdMatrix& w, const Mat& gamma, double rank_tol = kRankTol);

}  // namespace covsteer
