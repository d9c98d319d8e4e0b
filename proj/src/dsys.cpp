#include "covsteer/dsys.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace covsteer {

namespace {

void check_step_range(int k, int i, int horizon, const char* who) {
    if (i > k) {
        throw std::out_of_range(std::string(who) + ": i > k");
    }
    if (i < 0 || k > horizon) {
        throw std::out_of_range(std::string(who) + ": step outside [0, horizon]");
    }
}

double condition_number(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m);
    const Vec& sv = svd.singularValues();
    if (sv.size() == 0 || sv.minCoeff() <= 0.0) return std::numeric_limits<double>::infinity();
    return sv.maxCoeff() / sv.minCoeff();
}

}  // namespace

DiscreteLtvSystem DiscreteLtvSystem::lti(const Mat& a, const Mat& b, const Mat& d, int horizon) {
    DiscreteLtvSystem sys;
    sys.n_ = a.rows();
    sys.p_ = b.cols();
    sys.q_ = d.cols();
    sys.horizon_ = horizon;
    sys.constant_ = true;
    sys.a_ = {a};
    sys.b_ = {b};
    sys.d_ = {d};
    sys.validate();
    return sys;
}

DiscreteLtvSystem DiscreteLtvSystem::ltv(std::vector<Mat> a, std::vector<Mat> b, std::vector<Mat> d) {
    if (a.empty() || a.size() != b.size() || a.size() != d.size()) {
        throw std::invalid_argument("DiscreteLtvSystem: coefficient sequences must be nonempty and equal length");
    }
    DiscreteLtvSystem sys;
    sys.n_ = a[0].rows();
    sys.p_ = b[0].cols();
    sys.q_ = d[0].cols();
    sys.horizon_ = static_cast<int>(a.size());
    sys.constant_ = false;
    sys.a_ = std::move(a);
    sys.b_ = std::move(b);
    sys.d_ = std::move(d);
    sys.validate();
    return sys;
}

void DiscreteLtvSystem::validate() const {
    if (horizon_ < 1) {
        throw std::invalid_argument("DiscreteLtvSystem: horizon must be >= 1");
    }
    for (size_t j = 0; j < a_.size(); ++j) {
        if (a_[j].rows() != n_ || a_[j].cols() != n_ || b_[j].rows() != n_ || b_[j].cols() != p_ ||
            d_[j].rows() != n_ || d_[j].cols() != q_) {
            throw std::invalid_argument("DiscreteLtvSystem: inconsistent matrix dimensions at step " +
                                        std::to_string(j));
        }
        if (!a_[j].allFinite() || !b_[j].allFinite() || !d_[j].allFinite()) {
            throw std::invalid_argument("DiscreteLtvSystem: non-finite entries at step " + std::to_string(j));
        }
    }
}

DiscretePolicy DiscretePolicy::zero(const DiscreteLtvSystem& sys, int k) {
    DiscretePolicy pol;
    pol.F.assign(static_cast<size_t>(k), Mat::Zero(sys.p(), sys.n()));
    pol.V.assign(static_cast<size_t>(k), Mat::Zero(sys.p(), sys.p()));
    return pol;
}

Mat phi(const DiscreteLtvSystem& sys, int k, int i, const DiscretePolicy* policy) {
    check_step_range(k, i, sys.horizon(), "phi");
    Mat result = Mat::Identity(sys.n(), sys.n());
    for (int j = i; j < k; ++j) {
        Mat aj = sys.A(j);
        if (policy != nullptr) aj += sys.B(j) * policy->F.at(static_cast<size_t>(j));
        result = aj * result;
    }
    return result;
}

PsdMatrix reach_gramian(const DiscreteLtvSystem& sys, int k, int i) {
    check_step_range(k, i, sys.horizon(), "reach_gramian");
    Mat g = Mat::Zero(sys.n(), sys.n());
    // Accumulate via G(j+1, i) = A_j G(j, i) A_j^T + B_j B_j^T.
    for (int j = i; j < k; ++j) {
        g = sys.A(j) * g * sys.A(j).transpose() + sys.B(j) * sys.B(j).transpose();
    }
    return PsdMatrix(g, 1e-8);
}

PsdMatrix ctrl_gramian(const DiscreteLtvSystem& sys, int k, int i) {
    check_step_range(k, i, sys.horizon(), "ctrl_gramian");
    for (int j = i; j < k; ++j) {
        if (condition_number(sys.A(j)) >= 1e12) {
            throw std::runtime_error("ctrl_gramian: A_" + std::to_string(j) +
                                     " is singular; controllability Gramian undefined");
        }
    }
    Mat ghat = Mat::Zero(sys.n(), sys.n());
    // Ghat(k, i) = sum_j Phi_A(i, j+1) B_j B_j^T Phi_A(i, j+1)^T with Phi_A(i, j+1) built
    // from inverse factors.
    Mat back = Mat::Identity(sys.n(), sys.n());  // Phi_A(i, j) as j advances
    for (int j = i; j < k; ++j) {
        back = back * sys.A(j).partialPivLu().inverse();
        const Mat col = back * sys.B(j);
        ghat += col * col.transpose();
    }
    return PsdMatrix(ghat, 1e-8);
}

CovTrajectory propagate_cov(const DiscreteLtvSystem& sys, const PsdMatrix& sigma0,
                            const DiscretePolicy& policy, int k, const std::optional<Vec>& mu0) {
    if (k < 0 || k > sys.horizon()) {
        throw std::out_of_range("propagate_cov: k outside [0, horizon]");
    }
    if (policy.F.size() < static_cast<size_t>(k) || policy.V.size() < static_cast<size_t>(k)) {
        throw std::invalid_argument("propagate_cov: policy shorter than k steps");
    }
    CovTrajectory traj;
    traj.sigmas.reserve(static_cast<size_t>(k) + 1);
    traj.sigmas.push_back(sigma0);
    if (mu0.has_value()) traj.means.push_back(*mu0);

    Mat sigma = sigma0.mat();
    for (int j = 0; j < k; ++j) {
        const Mat& vj = policy.V[static_cast<size_t>(j)];
        if (!is_psd(vj, 1e-9)) {
            throw std::invalid_argument("propagate_cov: V_" + std::to_string(j) + " is not PSD");
        }
        const Mat acl = sys.A(j) + sys.B(j) * policy.F[static_cast<size_t>(j)];
        sigma = acl * sigma * acl.transpose() + sys.B(j) * vj * sys.B(j).transpose() +
                sys.D(j) * sys.D(j).transpose();
        sigma = 0.5 * (sigma + sigma.transpose());
        traj.sigmas.push_back(PsdMatrix(sigma, 1e-8));
        if (mu0.has_value()) {
            traj.means.push_back(acl * traj.means.back());
        }
    }
    return traj;
}

}  // namespace covsteer
