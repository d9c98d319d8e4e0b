#pragma once

#include <optional>
#include <vector>

#include "covsteer/matcore.hpp"

namespace covsteer {

// Discrete-time linear stochastic system
//   x_{k+1} = A_k x_k + B_k u_k + D_k w_k
// with E[w_k] = 0 and E[w_k w_k^T] = I_q. Time-invariant systems store one
// matrix per coefficient and replicate it across the horizon.
class DiscreteLtvSystem {
  public:
    static DiscreteLtvSystem lti(const Mat& a, const Mat& b, const Mat& d, int horizon);
    static DiscreteLtvSystem ltv(std::vector<Mat> a, std::vector<Mat> b, std::vector<Mat> d);

    Eigen::Index n() const { return n_; }
    Eigen::Index p() const { return p_; }
    Eigen::Index q() const { return q_; }
    int horizon() const { return horizon_; }
    bool time_invariant() const { return constant_; }

    const Mat& A(int k) const { return constant_ ? a_[0] : a_.at(static_cast<size_t>(k)); }
    const Mat& B(int k) const { return constant_ ? b_[0] : b_.at(static_cast<size_t>(k)); }
    const Mat& D(int k) const { return constant_ ? d_[0] : d_.at(static_cast<size_t>(k)); }

  private:
    DiscreteLtvSystem() = default;
    void validate() const;

    Eigen::Index n_ = 0, p_ = 0, q_ = 0;
    int horizon_ = 0;
    bool constant_ = false;
    std::vector<Mat> a_, b_, d_;
};

// Randomized state feedback u_k = F_k x_k + nu_k with E[nu_k nu_k^T] = V_k >= 0.
struct DiscretePolicy {
    std::vector<Mat> F;
    std::vector<Mat> V;

    static DiscretePolicy zero(const DiscreteLtvSystem& sys, int k);
};

struct CovTrajectory {
    std::vector<PsdMatrix> sigmas;    // Sigma_0 .. Sigma_k
    std::vector<Vec> means;           // empty unless mu_0 supplied
};

// State transition matrix Phi_A(k, i) = A_{k-1} ... A_i (identity when i = k).
// With a policy, the transition of the closed loop A_s + B_s F_s.
Mat phi(const DiscreteLtvSystem& sys, int k, int i, const DiscretePolicy* policy = nullptr);

// Reachability Gramian G(k, i) = sum_{j=i}^{k-1} Phi_A(k, j+1) B_j B_j^T Phi_A(k, j+1)^T.
PsdMatrix reach_gramian(const DiscreteLtvSystem& sys, int k, int i);

// Controllability Gramian Ghat(k, i) = Phi_A(i, k) G(k, i) Phi_A(i, k)^T.
// Requires every A_j, j in [i, k), invertible (condition number below 1e12).
PsdMatrix ctrl_gramian(const DiscreteLtvSystem& sys, int k, int i);

// Closed-loop covariance propagation
//   Sigma_{j+1} = (A_j + B_j F_j) Sigma_j (A_j + B_j F_j)^T + B_j V_j B_j^T + D_j D_j^T,
// with optional mean recursion mu_{j+1} = (A_j + B_j F_j) mu_j.
CovTrajectory propagate_cov(const DiscreteLtvSystem& sys, const PsdMatrix& sigma0,
                            const DiscretePolicy& policy, int k,
                            const std::optional<Vec>& mu0 = std::nullopt);

}  // namespace covsteer
