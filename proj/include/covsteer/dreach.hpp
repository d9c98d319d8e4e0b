#pragma once

#include <vector>

#include "covsteer/dsys.hpp"

namespace covsteer {

enum class ConstraintKind { kEquality, kPsdInequality };

// One projected constraint P Sigma P (= or >=) P target P of the terminal
// reachable set. Entry i = 0 is the equality on the uncontrollable coordinates;
// entries i = 1..k are PSD inequalities; P_{k,i} projects onto the orthogonal
// complement of range G(k, i).
struct ReachConstraint {
    int i;
    Projector projector;
    SymMatrix target;
    ConstraintKind kind;
};

struct ReachabilityCertificate {
    int k;
    std::vector<ReachConstraint> constraints;
    double eq_tol;
    double psd_tol;
};

struct ConstraintViolation {
    int i;
    ConstraintKind kind;
    double residual;
};

struct ReachabilityVerdict {
    bool member = false;
    std::vector<ConstraintViolation> violations;
};

// Which controllability condition failed: kGramianSingular means G(k,0) is not
// positive definite, kRangeAtStep means the range inclusion fails at step failed_i.
enum class ControllabilityFailure { kNone, kGramianSingular, kRangeAtStep };

struct ControllabilityVerdict {
    bool controllable = false;
    ControllabilityFailure failure = ControllabilityFailure::kNone;
    int failed_i = -1;
};

// Intersection description of the reachable covariance set at step k: one equality
// constraint and k PSD inequalities on projected blocks.
ReachabilityCertificate reach_set_description(const DiscreteLtvSystem& sys, const PsdMatrix& sigma0,
                                              int k, double rank_tol = kRankTol);

// Residual of every certificate constraint: Frobenius gap for the equality,
// most-negative eigenvalue (clamped at zero) for the PSD inequalities.
std::vector<ConstraintViolation> constraint_residuals(const ReachabilityCertificate& cert,
                                                      const SymMatrix& sigmaK);

// Evaluate a certificate against a candidate terminal covariance.
ReachabilityVerdict check_membership(const ReachabilityCertificate& cert, const SymMatrix& sigmaK,
                                     double tol = 1e-8);

ReachabilityVerdict is_reachable_cov(const DiscreteLtvSystem& sys, const PsdMatrix& sigma0, int k,
                                     const SymMatrix& sigmaK, double tol = 1e-8);

// Covariance controllability from time 0 to k: G(k,0) > 0 and
// range Phi_A(k,i) D_{i-1} within range G(k,i) for i = 1..k. When every A_j is
// invertible the equivalent controllability-Gramian form is evaluated as a
// cross-check and disagreement raises.
ControllabilityVerdict cov_controllable(const DiscreteLtvSystem& sys, int k,
                                        double rank_tol = kRankTol);

// Mean reachability: mu_k lies in Phi_A(k,0) mu_0 + range G(k,0).
bool mean_reachable(const DiscreteLtvSystem& sys, const Vec& mu0, int k, const Vec& muK,
                    double tol = 1e-8, double rank_tol = kRankTol);

}  // namespace covsteer
