#include "covsteer/oracles.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace covsteer {
namespace oracles {

nlohmann::json OracleReport::to_json() const {
    nlohmann::json doc;
    doc["name"] = name;
    doc["values"] = values;
    doc["method"] = method;
    doc["tolerance"] = tolerance;
    return doc;
}

double fixed_entry_oracle(const DiscreteLtvSystem& sys, const Mat& sigma0, int k,
                          Eigen::Index coord) {
    const Eigen::Index n = sys.n();
    Vec e = Vec::Zero(n);
    e[coord] = 1.0;

    // Plain power/product loops; no Gramians, no projectors.
    Mat phi_k0 = Mat::Identity(n, n);
    for (int j = 0; j < k; ++j) phi_k0 = sys.A(j) * phi_k0;
    double value = e.dot(phi_k0 * sigma0 * phi_k0.transpose() * e);
    for (int j = 1; j <= k; ++j) {
        Mat phi_kj = Mat::Identity(n, n);
        for (int s = j; s < k; ++s) phi_kj = sys.A(s) * phi_kj;
        const Mat ddt = sys.D(j - 1) * sys.D(j - 1).transpose();
        value += e.dot(phi_kj * ddt * phi_kj.transpose() * e);
    }
    return value;
}

double scalar_riccati_escape_time(double a, double b, double pi0) {
    const double inf = std::numeric_limits<double>::infinity();
    if (pi0 <= 0.0 || b == 0.0) return inf;
    if (a == 0.0) return 1.0 / (pi0 * b * b);
    // 1 = pi0 * b^2 * (1 - e^{-2at}) / (2a)
    const double arg = 1.0 - 2.0 * a / (pi0 * b * b);
    if (arg <= 0.0) return inf;  // denominator never reaches zero
    const double t = std::log(arg) / (-2.0 * a);
    return t > 0.0 ? t : inf;
}

double scalar_riccati_oracle(double a, double b, double pi0, double t) {
    const double escape = scalar_riccati_escape_time(a, b, pi0);
    if (escape <= t) {
        throw std::domain_error("scalar_riccati_oracle: solution escapes at t = " +
                                std::to_string(escape));
    }
    const double accum = (a == 0.0) ? t : (1.0 - std::exp(-2.0 * a * t)) / (2.0 * a);
    return pi0 * std::exp(-2.0 * a * t) / (1.0 - pi0 * b * b * accum);
}

Interval enumerate_reachable_1d(double a, double b, double d, int k, double sigma0, int f_grid,
                                double f_lo, double f_hi, int v_grid, double v_hi) {
    if (k < 1 || f_grid < 2 || v_grid < 1) {
        throw std::invalid_argument("enumerate_reachable_1d: degenerate grid");
    }
    // The map sigma -> (a+bF)^2 sigma + b^2 V + d^2 is monotone in sigma, so the
    // interval hull propagates step by step without enumerating policy tuples.
    double gain_min = std::numeric_limits<double>::infinity();
    double gain_max = 0.0;
    for (int i = 0; i < f_grid; ++i) {
        const double f = f_lo + (f_hi - f_lo) * i / (f_grid - 1);
        const double g = (a + b * f) * (a + b * f);
        gain_min = std::min(gain_min, g);
        gain_max = std::max(gain_max, g);
    }
    Interval hull{sigma0, sigma0};
    for (int j = 0; j < k; ++j) {
        hull.lo = gain_min * hull.lo + d * d;
        hull.hi = gain_max * hull.hi + b * b * v_hi + d * d;
    }
    return hull;
}

}  // namespace oracles
}  // namespace covsteer
