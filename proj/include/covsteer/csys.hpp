#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "covsteer/matcore.hpp"

namespace covsteer {

using GainFn = std::function<Mat(double)>;

// Continuous-time linear stochastic system
//   dx = A(t) x dt + B(t) u dt + D(t) dw,   t in [0, T],
// with coefficients held as samples on a uniform grid of `grid` intervals and
// interpolated linearly between nodes. All integrations are fixed-step classical
// RK4 on that grid; integrals are composite trapezoid over the same nodes.
class ContinuousLtvSystem {
  public:
    static ContinuousLtvSystem lti(const Mat& a, const Mat& b, const Mat& d, double T, int grid = 400);
    static ContinuousLtvSystem from_functions(const std::function<Mat(double)>& a,
                                              const std::function<Mat(double)>& b,
                                              const std::function<Mat(double)>& d, double T,
                                              int grid = 400);

    Eigen::Index n() const { return n_; }
    Eigen::Index p() const { return p_; }
    Eigen::Index q() const { return q_; }
    double T() const { return T_; }
    int grid() const { return grid_; }
    double dt() const { return T_ / grid_; }
    double node(int j) const { return T_ * j / grid_; }

    Mat A_at(double t) const;
    Mat B_at(double t) const;
    Mat D_at(double t) const;

    const Mat& A_node(int j) const { return a_.at(static_cast<size_t>(j)); }
    const Mat& B_node(int j) const { return b_.at(static_cast<size_t>(j)); }
    const Mat& D_node(int j) const { return d_.at(static_cast<size_t>(j)); }

  private:
    ContinuousLtvSystem() = default;
    Mat interp(const std::vector<Mat>& samples, double t) const;

    Eigen::Index n_ = 0, p_ = 0, q_ = 0;
    double T_ = 0.0;
    int grid_ = 0;
    std::vector<Mat> a_, b_, d_;  // grid + 1 samples each
};

// State transition matrix Phi(t1, t0) of A(t) (or A(t) + B(t) F(t) when a feedback
// gain is supplied); integrates the matrix ODE with classical RK4, forward or backward.
Mat phi_c(const ContinuousLtvSystem& sys, double t1, double t0, const GainFn* feedback = nullptr);

struct GramianPair {
    PsdMatrix G;      // reachability Gramian G(T, t)
    PsdMatrix Ghat;   // controllability Gramian Ghat(T, t) = Phi(t,T) G(T,t) Phi(t,T)^T
};

GramianPair gramians_c(const ContinuousLtvSystem& sys, double t_end, double t);

// Terminal covariance of the closed-loop Lyapunov ODE
//   dSigma/dt = (A+BF) Sigma + Sigma (A+BF)^T + D D^T
// integrated over [0, T] with RK4 and per-step symmetrization.
PsdMatrix propagate_cov_c(const ContinuousLtvSystem& sys, const PsdMatrix& sigma0,
                          const GainFn& feedback);

// Piecewise-constant matrix parameter K(t) on the grid nodes; every
// Phi_A(T,t) + G(T,t) K(t) must stay invertible (condition number < 1e12).
struct UpperBoundParam {
    std::vector<Mat> K;  // one per grid node (grid + 1 entries), or a single constant entry
};

// One element of the terminal-covariance outer bound for a given K(.).
PsdMatrix upper_bound_sample(const ContinuousLtvSystem& sys, const PsdMatrix& sigma0,
                             const UpperBoundParam& param);

struct ContControllabilityVerdict {
    bool controllable = false;
    std::optional<int> failed_node;  // grid node where the range condition failed
};

// Covariance controllability on [0, T]: Ghat(T,0) > 0 and range D(t) within
// range Ghat(T,t) at every grid node t < T. The reachability-Gramian form of the
// same condition is evaluated as a cross-check and disagreement raises.
ContControllabilityVerdict cov_controllable_c(const ContinuousLtvSystem& sys,
                                              double rank_tol = kRankTol);

namespace detail {

// Per-interval transition factors Phi(tau_{j+1}, tau_j), one RK4 step each.
std::vector<Mat> interval_transitions(const ContinuousLtvSystem& sys, const GainFn* feedback = nullptr);

// Suffix products Phi(T, tau_j) and backward-accumulated trapezoid Gramians G(T, tau_j)
// for every grid node j, sharing one table of interval factors.
struct NodeTables {
    std::vector<Mat> phi_T_from;  // Phi(T, tau_j)
    std::vector<Mat> gram_T_from; // G(T, tau_j)
};
NodeTables node_tables(const ContinuousLtvSystem& sys);

}  // namespace detail

}  // namespace covsteer
