#pragma once

#include <random>

#include "covsteer/csys.hpp"
#include "covsteer/dsys.hpp"

namespace covsteer::testutil {

inline Mat rand_mat(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
    std::normal_distribution<double> dist(0.0, scale);
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
    }
    return m;
}

inline Mat rand_sym(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
    const Mat m = rand_mat(rng, n, n, scale);
    return 0.5 * (m + m.transpose());
}

inline Mat rand_psd(std::mt19937_64& rng, Eigen::Index n, Eigen::Index rank = -1, double scale = 1.0) {
    if (rank < 0) rank = n;
    const Mat r = rand_mat(rng, n, rank, scale);
    return r * r.transpose();
}

inline Mat rand_pd(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
    return rand_psd(rng, n, n, scale) + 0.1 * Mat::Identity(n, n);
}

// Random invertible A (resampled until well conditioned), random B, D.
inline DiscreteLtvSystem rand_discrete_lti(std::mt19937_64& rng, Eigen::Index n, Eigen::Index p,
                                           Eigen::Index q, int horizon, double d_scale = 1.0) {
    Mat a;
    for (;;) {
        a = rand_mat(rng, n, n);
        Eigen::JacobiSVD<Mat> svd(a);
        if (svd.singularValues().minCoeff() > 0.1) break;
    }
    return DiscreteLtvSystem::lti(a, rand_mat(rng, n, p), d_scale * rand_mat(rng, n, q), horizon);
}

inline DiscretePolicy rand_policy(std::mt19937_64& rng, const DiscreteLtvSystem& sys, int k,
                                  double scale = 0.5) {
    DiscretePolicy pol;
    for (int j = 0; j < k; ++j) {
        pol.F.push_back(rand_mat(rng, sys.p(), sys.n(), scale));
        pol.V.push_back(rand_psd(rng, sys.p(), sys.p(), scale));
    }
    return pol;
}

// Dense RK4 integration of dPi/dt = -A^T Pi - Pi A + Pi B B^T Pi; test-side oracle,
// independent of the closed-form path. Returns the trajectory max norm through `steps`
// uniform steps and the terminal value.
struct RiccatiOdeRun {
    Mat pi_end;
    double max_norm = 0.0;
    bool finite = true;
};

inline RiccatiOdeRun integrate_riccati_ode(const ContinuousLtvSystem& sys, const Mat& pi0, double t,
                                           int steps) {
    RiccatiOdeRun run;
    auto rhs = [&](double tau, const Mat& pi) -> Mat {
        const Mat a = sys.A_at(tau);
        const Mat b = sys.B_at(tau);
        return -a.transpose() * pi - pi * a + pi * b * b.transpose() * pi;
    };
    const double h = t / steps;
    Mat pi = pi0;
    run.max_norm = pi.norm();
    for (int j = 0; j < steps; ++j) {
        const double ta = j * h;
        const Mat k1 = rhs(ta, pi);
        const Mat k2 = rhs(ta + 0.5 * h, pi + 0.5 * h * k1);
        const Mat k3 = rhs(ta + 0.5 * h, pi + 0.5 * h * k2);
        const Mat k4 = rhs(ta + h, pi + h * k3);
        pi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        pi = 0.5 * (pi + pi.transpose());
        if (!pi.allFinite()) {
            run.finite = false;
            run.max_norm = std::numeric_limits<double>::infinity();
            break;
        }
        run.max_norm = std::max(run.max_norm, pi.norm());
    }
    run.pi_end = pi;
    return run;
}

// The two-dimensional system of the worked steering example.
inline DiscreteLtvSystem example_system(int horizon = 30) {
    Mat a(2, 2), b(2, 1), d(2, 2);
    a << 1.0, 0.2, 0.0, 0.96;
    b << 1.0, 0.0;
    d << 0.4, 0.2, 0.0, 0.3;
    return DiscreteLtvSystem::lti(a, b, d, horizon);
}

inline Mat example_sigma0() {
    Mat s(2, 2);
    s << 5.0, -1.0, -1.0, 3.0;
    return s;
}

inline Mat example_sigma30() {
    Mat s(2, 2);
    s << 0.5, 0.2, 0.2, 1.3079;
    return s;
}

}  // namespace covsteer::testutil
