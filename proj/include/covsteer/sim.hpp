#pragma once

#include "covsteer/csteer.hpp"
#include "covsteer/dsys.hpp"
#include "covsteer/rng.hpp"

namespace covsteer {

// Monte Carlo sample paths; states[j] holds the N states at step/node j as columns.
struct SimEnsemble {
    int num_paths = 0;
    uint64_t seed = 0;
    std::vector<double> times;   // step index (discrete) or node time (continuous)
    std::vector<Mat> states;     // (k+1) entries of n x N
};

// Sample paths of x_{k+1} = A x_k + B (F x + nu) + D w with x_0 ~ N(mu0, Sigma0),
// nu_j ~ N(0, V_j), w_j ~ N(0, I). Deterministic in (seed, path index).
SimEnsemble simulate_discrete(const DiscreteLtvSystem& sys, const DiscretePolicy& policy,
                              const PsdMatrix& sigma0, const Vec& mu0, int num_paths, int k,
                              uint64_t seed);

// Euler-Maruyama on the shared grid under the closed-loop drift A - B B^T Pi.
SimEnsemble simulate_continuous(const ContinuousLtvSystem& sys, const ContinuousSteeringLaw& law,
                                const PsdMatrix& sigma0, const Vec& mu0, int num_paths,
                                uint64_t seed);

Vec empirical_mean(const SimEnsemble& ens, int j);

// Unbiased (N-1 divisor) sample covariance at step j, symmetrized.
PsdMatrix empirical_cov(const SimEnsemble& ens, int j);

// Points of the n_sigma covariance ellipse mu + n_sigma * Sigma^{1/2} (cos, sin);
// 2 x points, closed by the caller if needed. Only defined for n = 2.
Mat ellipse_data(const PsdMatrix& sigma, const Vec& mu, double n_sigma, int points);

}  // namespace covsteer
