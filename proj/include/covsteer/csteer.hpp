#pragma once

#include "covsteer/csys.hpp"

namespace covsteer {

// Finite-horizon Riccati solution
//   dPi/dt = -A(t)^T Pi - Pi A(t) + Pi B(t) B(t)^T Pi,   Pi(0) = pi0,
// evaluated through the closed form
//   Pi(t) = Phi_A(0,t)^T Pi(0) (I - Ghat(t,0) Pi(0))^{-1} Phi_A(0,t),
// which exists on [0, T] iff the eigenvalues of I - Ghat(T,0) Pi(0) are all positive.
class RiccatiSolution {
  public:
    RiccatiSolution(const ContinuousLtvSystem& sys, const SymMatrix& pi0);

    const SymMatrix& pi0() const { return pi0_; }
    const Mat& ghat_node(int j) const { return ghat_.at(static_cast<size_t>(j)); }

    // Pi(t); node evaluations use the cached Gramian/transition tables, interior
    // times interpolate the tables linearly.
    Mat at(double t) const;

  private:
    SymMatrix pi0_;
    double T_;
    int grid_;
    std::vector<Mat> ghat_;     // Ghat(tau_j, 0)
    std::vector<Mat> phi_0t_;   // Phi_A(0, tau_j)
};

// Minimum-energy covariance steering law u(t) = -B(t)^T Pi(t) x(t).
class ContinuousSteeringLaw {
  public:
    ContinuousSteeringLaw(ContinuousLtvSystem sys, RiccatiSolution riccati)
        : sys_(std::move(sys)), riccati_(std::move(riccati)) {}

    const RiccatiSolution& riccati() const { return riccati_; }
    const ContinuousLtvSystem& system() const { return sys_; }
    Mat gain(double t) const { return -sys_.B_at(t).transpose() * riccati_.at(t); }
    GainFn gain_fn() const {
        return [this](double t) { return gain(t); };
    }

  private:
    ContinuousLtvSystem sys_;
    RiccatiSolution riccati_;
};

// Per-evaluation cache shared by the steering map and its Jacobian.
struct FMapWorkspace {
    std::vector<Mat> Q;       // Q(tau_j) = (I - Ghat(tau_j,0) Pi0)^{-1} Ghat(tau_j,0)
    std::vector<Mat> Unoise;  // U(tau_j), the PSD noise integrand
    Mat phi_pi_T;             // Phi_Pi(T, 0)
    Mat f_value;              // f(Pi0)
    double h = 0.0;
};

// Existence of the Riccati solution on [0, T]: eigenvalues of I - Ghat(T,0) Pi(0)
// all exceed tol. Cross-checked against Ghat^{1/2} Pi0 Ghat^{1/2} < I.
bool riccati_exists(const ContinuousLtvSystem& sys, const SymMatrix& pi0, double tol = 1e-10);

SymMatrix riccati_solve(const ContinuousLtvSystem& sys, const SymMatrix& pi0, double t);

// Phi_Pi(t, s) = Phi_A(t, s) (I - Ghat(t, s) Pi(s)).
Mat phi_pi(const ContinuousLtvSystem& sys, const SymMatrix& pi0, double t, double s);

FMapWorkspace make_f_workspace(const ContinuousLtvSystem& sys, const PsdMatrix& sigma0,
                               const SymMatrix& pi0);

// Terminal covariance induced by the Riccati initial condition Pi0 under the
// gain F(t) = -B(t)^T Pi(t), starting from sigma0 > 0.
PsdMatrix f_map(const ContinuousLtvSystem& sys, const PsdMatrix& sigma0, const SymMatrix& pi0);

// Jacobian of the vectorized steering map at vec(Pi0); n^2 x n^2.
Mat f_jacobian(const ContinuousLtvSystem& sys, const PsdMatrix& sigma0, const SymMatrix& pi0);

struct NewtonConfig {
    double tol = 1e-9;
    int max_iter = 100;
};

// Solve f(Pi0) = sigmaT for Pi0 by damped Newton on the symmetric vectorization,
// starting from Pi0 = 0 and keeping iterates strictly inside
// {Pi0 : Ghat(T,0)^{1/2} Pi0 Ghat(T,0)^{1/2} < I}.
ContinuousSteeringLaw steer_min_energy(const ContinuousLtvSystem& sys, const PsdMatrix& sigma0,
                                       const PsdMatrix& sigmaT, const NewtonConfig& cfg = {});

// Duplication map: vec(S) = dup * vech(S) for symmetric S (vech stacks the lower
// triangle column-major).
Mat duplication_matrix(Eigen::Index n);
Vec vech(const Mat& s);
Mat unvech(const Vec& v, Eigen::Index n);

}  // namespace covsteer
