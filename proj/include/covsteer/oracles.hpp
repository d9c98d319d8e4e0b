#pragma once

#include <string>
#include <vector>

#include "covsteer/dsys.hpp"

#include "json.hpp"

namespace covsteer {
namespace oracles {

struct OracleReport {
    std::string name;
    std::vector<double> values;
    std::string method;
    double tolerance = 0.0;

    nlohmann::json to_json() const;
};

// Terminal value pinned on an uncontrollable coordinate: direct summation of
// e^T [Phi(k,0) Sigma0 Phi(k,0)^T + sum_j Phi(k,j) D D^T Phi(k,j)^T] e for the
// given coordinate, independent of the certificate machinery.
double fixed_entry_oracle(const DiscreteLtvSystem& sys, const Mat& sigma0, int k,
                          Eigen::Index coord = 1);

// Scalar Riccati dPi/dt = -2 a Pi + b^2 Pi^2 solved by separation of variables.
// Throws when the solution escapes at or before t; the escape time is reported.
double scalar_riccati_oracle(double a, double b, double pi0, double t);

// Escape time of the scalar Riccati solution, +inf when it exists globally.
double scalar_riccati_escape_time(double a, double b, double pi0);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Interval hull of the variances reachable by gridding scalar policies
// sigma_{j+1} = (a + b F)^2 sigma_j + b^2 V + d^2 over F in [f_lo, f_hi] and
// V in [0, v_hi], k steps.
Interval enumerate_reachable_1d(double a, double b, double d, int k, double sigma0,
                                int f_grid, double f_lo, double f_hi, int v_grid, double v_hi);

}  // namespace oracles
}  // namespace covsteer
