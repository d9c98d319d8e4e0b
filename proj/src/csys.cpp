#include "covsteer/csys.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace covsteer {

namespace {

void check_time(const ContinuousLtvSystem& sys, double t, const char* who) {
    if (t < -1e-12 || t > sys.T() + 1e-12) {
        throw std::out_of_range(std::string(who) + ": time outside [0, T]");
    }
}

// One classical RK4 step for Y' = M(t) Y from ta to tb, Y(ta) = I.
Mat rk4_step(const ContinuousLtvSystem& sys, double ta, double tb, const GainFn* feedback) {
    auto coeff = [&](double t) -> Mat {
        Mat m = sys.A_at(t);
        if (feedback != nullptr) m += sys.B_at(t) * (*feedback)(t);
        return m;
    };
    const double h = tb - ta;
    const Eigen::Index n = sys.n();
    const Mat id = Mat::Identity(n, n);
    const Mat m1 = coeff(ta);
    const Mat m2 = coeff(ta + 0.5 * h);
    const Mat m4 = coeff(tb);
    const Mat k1 = m1;
    const Mat k2 = m2 * (id + 0.5 * h * k1);
    const Mat k3 = m2 * (id + 0.5 * h * k2);
    const Mat k4 = m4 * (id + h * k3);
    return id + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double condition_number(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m);
    const Vec& sv = svd.singularValues();
    if (sv.minCoeff() <= 0.0) return std::numeric_limits<double>::infinity();
    return sv.maxCoeff() / sv.minCoeff();
}

bool is_pd_scaled(const Mat& m, double rank_tol) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    const double lmax = es.eigenvalues().maxCoeff();
    const double thr = rank_tol * std::max(1.0, lmax) * static_cast<double>(m.rows());
    return es.eigenvalues().minCoeff() > thr;
}

}  // namespace

ContinuousLtvSystem ContinuousLtvSystem::lti(const Mat& a, const Mat& b, const Mat& d, double T,
                                             int grid) {
    return from_functions([&](double) { return a; }, [&](double) { return b; },
                          [&](double) { return d; }, T, grid);
}

ContinuousLtvSystem ContinuousLtvSystem::from_functions(const std::function<Mat(double)>& a,
                                                        const std::function<Mat(double)>& b,
                                                        const std::function<Mat(double)>& d,
                                                        double T, int grid) {
    if (T <= 0.0) throw std::invalid_argument("ContinuousLtvSystem: T must be positive");
    if (grid < 2) throw std::invalid_argument("ContinuousLtvSystem: grid must be >= 2");
    ContinuousLtvSystem sys;
    sys.T_ = T;
    sys.grid_ = grid;
    sys.a_.reserve(grid + 1);
    sys.b_.reserve(grid + 1);
    sys.d_.reserve(grid + 1);
    for (int j = 0; j <= grid; ++j) {
        const double t = T * j / grid;
        sys.a_.push_back(a(t));
        sys.b_.push_back(b(t));
        sys.d_.push_back(d(t));
        if (!sys.a_.back().allFinite() || !sys.b_.back().allFinite() || !sys.d_.back().allFinite()) {
            throw std::invalid_argument("ContinuousLtvSystem: non-finite sample at node " +
                                        std::to_string(j));
        }
    }
    sys.n_ = sys.a_[0].rows();
    sys.p_ = sys.b_[0].cols();
    sys.q_ = sys.d_[0].cols();
    for (int j = 0; j <= grid; ++j) {
        if (sys.a_[j].rows() != sys.n_ || sys.a_[j].cols() != sys.n_ || sys.b_[j].rows() != sys.n_ ||
            sys.b_[j].cols() != sys.p_ || sys.d_[j].rows() != sys.n_ || sys.d_[j].cols() != sys.q_) {
            throw std::invalid_argument("ContinuousLtvSystem: inconsistent dimensions at node " +
                                        std::to_string(j));
        }
    }
    return sys;
}

Mat ContinuousLtvSystem::interp(const std::vector<Mat>& samples, double t) const {
    const double pos = std::clamp(t, 0.0, T_) / dt();
    const int j = std::min(static_cast<int>(pos), grid_ - 1);
    const double w = pos - j;
    return (1.0 - w) * samples[static_cast<size_t>(j)] + w * samples[static_cast<size_t>(j) + 1];
}

Mat ContinuousLtvSystem::A_at(double t) const { return interp(a_, t); }
Mat ContinuousLtvSystem::B_at(double t) const { return interp(b_, t); }
Mat ContinuousLtvSystem::D_at(double t) const { return interp(d_, t); }

Mat phi_c(const ContinuousLtvSystem& sys, double t1, double t0, const GainFn* feedback) {
    check_time(sys, t0, "phi_c");
    check_time(sys, t1, "phi_c");
    const double span = t1 - t0;
    if (span == 0.0) return Mat::Identity(sys.n(), sys.n());
    const int nsteps = std::max(1, static_cast<int>(std::lround(std::abs(span) / sys.dt())));
    const double h = span / nsteps;
    Mat result = Mat::Identity(sys.n(), sys.n());
    for (int j = 0; j < nsteps; ++j) {
        const double ta = t0 + j * h;
        result = rk4_step(sys, ta, ta + h, feedback) * result;
    }
    return result;
}

namespace detail {

std::vector<Mat> interval_transitions(const ContinuousLtvSystem& sys, const GainFn* feedback) {
    std::vector<Mat> s;
    s.reserve(sys.grid());
    for (int j = 0; j < sys.grid(); ++j) {
        s.push_back(rk4_step(sys, sys.node(j), sys.node(j + 1), feedback));
    }
    return s;
}

NodeTables node_tables(const ContinuousLtvSystem& sys) {
    const int ng = sys.grid();
    const double h = sys.dt();
    const std::vector<Mat> s = interval_transitions(sys);
    NodeTables tab;
    tab.phi_T_from.assign(ng + 1, Mat());
    tab.gram_T_from.assign(ng + 1, Mat());
    tab.phi_T_from[ng] = Mat::Identity(sys.n(), sys.n());
    tab.gram_T_from[ng] = Mat::Zero(sys.n(), sys.n());
    for (int j = ng - 1; j >= 0; --j) {
        tab.phi_T_from[j] = tab.phi_T_from[j + 1] * s[j];
        // composite trapezoid: add the interval [tau_j, tau_{j+1}] contribution
        const Mat f_lo = tab.phi_T_from[j] * sys.B_node(j);
        const Mat f_hi = tab.phi_T_from[j + 1] * sys.B_node(j + 1);
        tab.gram_T_from[j] = tab.gram_T_from[j + 1] +
                             0.5 * h * (f_lo * f_lo.transpose() + f_hi * f_hi.transpose());
        tab.gram_T_from[j] = 0.5 * (tab.gram_T_from[j] + tab.gram_T_from[j].transpose());
    }
    return tab;
}

}  // namespace detail

GramianPair gramians_c(const ContinuousLtvSystem& sys, double t_end, double t) {
    check_time(sys, t_end, "gramians_c");
    check_time(sys, t, "gramians_c");
    if (t > t_end) throw std::out_of_range("gramians_c: t > t_end");
    const Eigen::Index n = sys.n();
    if (t_end - t <= 1e-15) {
        return {PsdMatrix(Mat::Zero(n, n)), PsdMatrix(Mat::Zero(n, n))};
    }
    const int nsteps = std::max(1, static_cast<int>(std::lround((t_end - t) / sys.dt())));
    const double h = (t_end - t) / nsteps;

    // Phi(t_end, tau_j) for every node, by suffix products of one-step factors.
    std::vector<Mat> phis(nsteps + 1);
    phis[nsteps] = Mat::Identity(n, n);
    for (int j = nsteps - 1; j >= 0; --j) {
        const double ta = t + j * h;
        phis[j] = phis[j + 1] * rk4_step(sys, ta, ta + h, nullptr);
    }

    Mat g = Mat::Zero(n, n);
    for (int j = 0; j <= nsteps; ++j) {
        const double w = (j == 0 || j == nsteps) ? 0.5 : 1.0;
        const Mat col = phis[j] * sys.B_at(t + j * h);
        g += w * h * col * col.transpose();
    }
    g = 0.5 * (g + g.transpose());

    const Mat phi_t_end = phis[0].partialPivLu().inverse();  // Phi(t, t_end)
    Mat ghat = phi_t_end * g * phi_t_end.transpose();
    ghat = 0.5 * (ghat + ghat.transpose());
    return {PsdMatrix(g, 1e-8), PsdMatrix(ghat, 1e-8)};
}

PsdMatrix propagate_cov_c(const ContinuousLtvSystem& sys, const PsdMatrix& sigma0,
                          const GainFn& feedback) {
    auto acl = [&](double t) -> Mat { return sys.A_at(t) + sys.B_at(t) * feedback(t); };
    auto rhs = [&](double t, const Mat& sig) -> Mat {
        const Mat a = acl(t);
        return a * sig + sig * a.transpose() + sys.D_at(t) * sys.D_at(t).transpose();
    };
    Mat sigma = sigma0.mat();
    const double h = sys.dt();
    for (int j = 0; j < sys.grid(); ++j) {
        const double ta = sys.node(j);
        const Mat k1 = rhs(ta, sigma);
        const Mat k2 = rhs(ta + 0.5 * h, sigma + 0.5 * h * k1);
        const Mat k3 = rhs(ta + 0.5 * h, sigma + 0.5 * h * k2);
        const Mat k4 = rhs(ta + h, sigma + h * k3);
        sigma += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        sigma = 0.5 * (sigma + sigma.transpose());
        if (!sigma.allFinite() || sigma.norm() > 1e12) {
            throw std::runtime_error("propagate_cov_c: covariance diverged at t = " +
                                     std::to_string(ta + h));
        }
    }
    return PsdMatrix(sigma, 1e-8);
}

PsdMatrix upper_bound_sample(const ContinuousLtvSystem& sys, const PsdMatrix& sigma0,
                             const UpperBoundParam& param) {
    const int ng = sys.grid();
    auto k_at = [&](int j) -> const Mat& {
        return param.K.size() == 1 ? param.K[0] : param.K.at(static_cast<size_t>(j));
    };
    if (param.K.size() != 1 && param.K.size() != static_cast<size_t>(ng) + 1) {
        throw std::invalid_argument("upper_bound_sample: K must hold one matrix or grid+1 matrices");
    }
    const detail::NodeTables tab = detail::node_tables(sys);
    const double h = sys.dt();
    std::vector<Mat> m(ng + 1);
    for (int j = 0; j <= ng; ++j) {
        m[j] = tab.phi_T_from[j] + tab.gram_T_from[j] * k_at(j);
        if (condition_number(m[j]) >= 1e12) {
            throw std::invalid_argument("upper_bound_sample: Phi + G K singular at node " +
                                        std::to_string(j));
        }
    }
    Mat out = m[0] * sigma0.mat() * m[0].transpose();
    for (int j = 0; j <= ng; ++j) {
        const double w = (j == 0 || j == ng) ? 0.5 : 1.0;
        const Mat col = m[j] * sys.D_node(j);
        out += w * h * col * col.transpose();
    }
    out = 0.5 * (out + out.transpose());
    return PsdMatrix(out, 1e-8);
}

ContControllabilityVerdict cov_controllable_c(const ContinuousLtvSystem& sys, double rank_tol) {
    const int ng = sys.grid();
    const detail::NodeTables tab = detail::node_tables(sys);

    ContControllabilityVerdict verdict;
    verdict.controllable = true;

    // Controllability-Gramian form: Ghat(T, t) = Phi(t, T) G(T, t) Phi(t, T)^T.
    auto ghat_at = [&](int j) -> Mat {
        const Mat phi_t_T = tab.phi_T_from[j].partialPivLu().inverse();
        Mat ghat = phi_t_T * tab.gram_T_from[j] * phi_t_T.transpose();
        return 0.5 * (ghat + ghat.transpose());
    };

    if (!is_pd_scaled(ghat_at(0), rank_tol)) {
        verdict.controllable = false;
        verdict.failed_node = 0;
    } else {
        for (int j = 0; j < ng; ++j) {
            if (!range_inclusion(sys.D_node(j), ghat_at(j), rank_tol)) {
                verdict.controllable = false;
                verdict.failed_node = j;
                break;
            }
        }
    }

    // Cross-check through the reachability Gramian.
    bool alt = is_pd_scaled(tab.gram_T_from[0], rank_tol);
    if (alt) {
        for (int j = 0; j < ng; ++j) {
            if (!range_inclusion(tab.phi_T_from[j] * sys.D_node(j), tab.gram_T_from[j], rank_tol)) {
                alt = false;
                break;
            }
        }
    }
    if (alt != verdict.controllable) {
        throw std::runtime_error("cov_controllable_c: Gramian condition forms disagree");
    }
    return verdict;
}

}  // namespace covsteer
