#include "covsteer/sim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace covsteer {

namespace {

Vec normal_vec(const CounterRng& rng, uint64_t step, uint64_t base, Eigen::Index len) {
    Vec v(len);
    for (Eigen::Index i = 0; i < len; ++i) {
        v[i] = rng.normal(step, base + static_cast<uint64_t>(i));
    }
    return v;
}

}  // namespace

SimEnsemble simulate_discrete(const DiscreteLtvSystem& sys, const DiscretePolicy& policy,
                              const PsdMatrix& sigma0, const Vec& mu0, int num_paths, int k,
                              uint64_t seed) {
    if (num_paths < 1) throw std::invalid_argument("simulate_discrete: need at least one path");
    if (policy.F.size() < static_cast<size_t>(k)) {
        throw std::invalid_argument("simulate_discrete: policy shorter than k steps");
    }
    const Eigen::Index n = sys.n();
    const Eigen::Index p = sys.p();
    const Eigen::Index q = sys.q();
    const Mat root0 = psd_sqrt(sigma0.mat(), 1e-8);
    std::vector<Mat> vroots(static_cast<size_t>(k));
    for (int j = 0; j < k; ++j) {
        vroots[static_cast<size_t>(j)] = psd_sqrt(policy.V[static_cast<size_t>(j)], 1e-8);
    }

    SimEnsemble ens;
    ens.num_paths = num_paths;
    ens.seed = seed;
    ens.times.resize(static_cast<size_t>(k) + 1);
    for (int j = 0; j <= k; ++j) ens.times[static_cast<size_t>(j)] = j;
    ens.states.assign(static_cast<size_t>(k) + 1, Mat(n, num_paths));

    for (int path = 0; path < num_paths; ++path) {
        const CounterRng rng(seed, static_cast<uint64_t>(path));
        Vec x = mu0 + root0 * normal_vec(rng, 0, 0, n);
        ens.states[0].col(path) = x;
        for (int j = 0; j < k; ++j) {
            // draw indices: [0, p) control noise, [p, p + q) process noise
            const Vec nu = vroots[static_cast<size_t>(j)] *
                           normal_vec(rng, static_cast<uint64_t>(j) + 1, 0, p);
            const Vec w = normal_vec(rng, static_cast<uint64_t>(j) + 1, static_cast<uint64_t>(p), q);
            const Vec u = policy.F[static_cast<size_t>(j)] * x + nu;
            x = sys.A(j) * x + sys.B(j) * u + sys.D(j) * w;
            ens.states[static_cast<size_t>(j) + 1].col(path) = x;
        }
    }
    return ens;
}

SimEnsemble simulate_continuous(const ContinuousLtvSystem& sys, const ContinuousSteeringLaw& law,
                                const PsdMatrix& sigma0, const Vec& mu0, int num_paths,
                                uint64_t seed) {
    if (num_paths < 1) throw std::invalid_argument("simulate_continuous: need at least one path");
    const Eigen::Index n = sys.n();
    const Eigen::Index q = sys.q();
    const int ng = sys.grid();
    const double h = sys.dt();
    const double sqrt_h = std::sqrt(h);
    const Mat root0 = psd_sqrt(sigma0.mat(), 1e-8);

    // Closed-loop drift at each node, evaluated once.
    std::vector<Mat> drift(static_cast<size_t>(ng));
    for (int j = 0; j < ng; ++j) {
        const double t = sys.node(j);
        drift[static_cast<size_t>(j)] = sys.A_at(t) + sys.B_at(t) * law.gain(t);
    }

    SimEnsemble ens;
    ens.num_paths = num_paths;
    ens.seed = seed;
    ens.times.resize(static_cast<size_t>(ng) + 1);
    for (int j = 0; j <= ng; ++j) ens.times[static_cast<size_t>(j)] = sys.node(j);
    ens.states.assign(static_cast<size_t>(ng) + 1, Mat(n, num_paths));

    for (int path = 0; path < num_paths; ++path) {
        const CounterRng rng(seed, static_cast<uint64_t>(path));
        Vec x = mu0 + root0 * normal_vec(rng, 0, 0, n);
        ens.states[0].col(path) = x;
        for (int j = 0; j < ng; ++j) {
            const Vec xi = normal_vec(rng, static_cast<uint64_t>(j) + 1, 0, q);
            x = x + h * (drift[static_cast<size_t>(j)] * x) + sqrt_h * (sys.D_node(j) * xi);
            if (!x.allFinite() || x.norm() > 1e12) {
                throw std::runtime_error("simulate_continuous: path " + std::to_string(path) +
                                         " diverged at node " + std::to_string(j + 1));
            }
            ens.states[static_cast<size_t>(j) + 1].col(path) = x;
        }
    }
    return ens;
}

Vec empirical_mean(const SimEnsemble& ens, int j) {
    const Mat& states = ens.states.at(static_cast<size_t>(j));
    return states.rowwise().mean();
}

PsdMatrix empirical_cov(const SimEnsemble& ens, int j) {
    if (ens.num_paths < 2) {
        throw std::invalid_argument("empirical_cov: need at least two paths");
    }
    const Mat& states = ens.states.at(static_cast<size_t>(j));
    const Vec mean = states.rowwise().mean();
    const Mat centered = states.colwise() - mean;
    Mat cov = centered * centered.transpose() / static_cast<double>(ens.num_paths - 1);
    cov = 0.5 * (cov + cov.transpose());
    return PsdMatrix(cov, 1e-9);
}

Mat ellipse_data(const PsdMatrix& sigma, const Vec& mu, double n_sigma, int points) {
    if (sigma.dim() != 2 || mu.size() != 2) {
        throw std::invalid_argument("ellipse_data: only two-dimensional covariances are supported");
    }
    if (points < 3) throw std::invalid_argument("ellipse_data: need at least three points");
    const Mat root = psd_sqrt(sigma.mat(), 1e-8);
    Mat out(2, points);
    for (int i = 0; i < points; ++i) {
        const double theta = 2.0 * std::numbers::pi * i / points;
        const Vec dir = (Vec(2) << std::cos(theta), std::sin(theta)).finished();
        out.col(i) = mu + n_sigma * (root * dir);
    }
    return out;
}

}  // namespace covsteer
