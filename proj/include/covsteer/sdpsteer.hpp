#pragma once

#include "covsteer/dsys.hpp"
#include "covsteer/sdp.hpp"

#include "json.hpp"

namespace covsteer {

// Discrete covariance-steering program
//   min sum_i trace(R_i Y_i)
//   s.t. Sigma_{i+1} = A_i Sigma_i A_i^T + B_i U_i A_i^T + A_i U_i^T B_i^T
//                      + B_i Y_i B_i^T + D_i D_i^T,
//        [[Sigma_i, U_i^T], [U_i, Y_i]] >= 0,   Sigma_0 and Sigma_k pinned,
// in standard conic form over k PSD blocks of dimension n + p.
struct SdpProblem {
    ConicProblem conic;
    int k = 0;
    Eigen::Index n = 0;
    Eigen::Index p = 0;
    Mat sigma0;
    Mat sigmaK;

    nlohmann::json to_json() const;
};

struct SdpSolution {
    SolveStatus status = SolveStatus::kNumericalError;
    std::vector<Mat> sigma;  // Sigma_0 .. Sigma_k
    std::vector<Mat> U;      // U_0 .. U_{k-1}
    std::vector<Mat> Y;      // Y_0 .. Y_{k-1}
    double objective = 0.0;
    double rel_primal = 0.0;
    double rel_gap = 0.0;
    int iterations = 0;
    std::string message;
};

SdpProblem build_steering_sdp(const DiscreteLtvSystem& sys, const PsdMatrix& sigma0,
                              const PsdMatrix& sigmaK, int k,
                              const std::vector<Mat>& weights = {});

SdpSolution solve_steering_sdp(const SdpProblem& prob, const SolverConfig& cfg = {});

// F_i = U_i Sigma_i^+, V_i = Y_i - F_i Sigma_i F_i^T floored at zero; eigenvalues
// of V_i below -1e-7 indicate an inconsistent solution and raise.
DiscretePolicy recover_policy(const DiscreteLtvSystem& sys, const SdpSolution& solution);

}  // namespace covsteer
