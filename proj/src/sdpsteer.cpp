#include "covsteer/sdpsteer.hpp"

#include <stdexcept>
#include <string>

namespace covsteer {

namespace {

// svec coefficients of the functional Z |-> (M Z M^T)(r, c) on a symmetric Z.
Vec entry_functional(const Mat& m, Eigen::Index r, Eigen::Index c) {
    const Vec mr = m.row(r).transpose();
    const Vec mc = m.row(c).transpose();
    return svec(0.5 * (mr * mc.transpose() + mc * mr.transpose()));
}

}  // namespace

SdpProblem build_steering_sdp(const DiscreteLtvSystem& sys, const PsdMatrix& sigma0,
                              const PsdMatrix& sigmaK, int k, const std::vector<Mat>& weights) {
    if (k < 1) throw std::invalid_argument("build_steering_sdp: k must be >= 1");
    if (k > sys.horizon()) throw std::invalid_argument("build_steering_sdp: k exceeds horizon");
    const Eigen::Index n = sys.n();
    const Eigen::Index p = sys.p();
    if (sigma0.dim() != n || sigmaK.dim() != n) {
        throw std::invalid_argument("build_steering_sdp: boundary covariance dimension mismatch");
    }
    if (!weights.empty() && weights.size() != static_cast<size_t>(k)) {
        throw std::invalid_argument("build_steering_sdp: need one weight per control step");
    }
    for (const Mat& r : weights) {
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (r + r.transpose()), Eigen::EigenvaluesOnly);
        if (r.rows() != p || r.cols() != p || es.eigenvalues().minCoeff() <= 0.0) {
            throw std::invalid_argument("build_steering_sdp: weights must be p x p positive definite");
        }
    }

    const Eigen::Index db = n + p;          // block dimension
    const Eigen::Index svb = svec_dim(db);  // block svec size
    const Eigen::Index svn = svec_dim(n);
    const Eigen::Index nvar = k * svb;
    const Eigen::Index neq = (k + 1) * svn;

    SdpProblem prob;
    prob.k = k;
    prob.n = n;
    prob.p = p;
    prob.sigma0 = sigma0.mat();
    prob.sigmaK = sigmaK.mat();
    prob.conic.blocks.assign(static_cast<size_t>(k), static_cast<int>(db));
    prob.conic.c = Vec::Zero(nvar);
    prob.conic.A = Mat::Zero(neq, nvar);
    prob.conic.b = Vec::Zero(neq);

    // Objective: sum_i <blkdiag(0, R_i), Z_i>.
    for (int i = 0; i < k; ++i) {
        Mat cost = Mat::Zero(db, db);
        cost.bottomRightCorner(p, p) = weights.empty() ? Mat::Identity(p, p) : weights[static_cast<size_t>(i)];
        prob.conic.c.segment(i * svb, svb) = svec(cost);
    }

    Eigen::Index row = 0;

    // Pin the Sigma block of Z_0 to sigma0.
    for (Eigen::Index c = 0; c < n; ++c) {
        for (Eigen::Index r = c; r < n; ++r) {
            Mat indicator = Mat::Zero(db, db);
            indicator(r, c) = 0.5;
            indicator(c, r) += 0.5;
            prob.conic.A.block(row, 0, 1, svb) = svec(indicator).transpose();
            prob.conic.b[row] = sigma0.mat()(r, c);
            ++row;
        }
    }

    // Recursion [A_i B_i] Z_i [A_i B_i]^T - Sigma_{i+1} = -D_i D_i^T; the final step
    // moves the pinned Sigma_k to the right-hand side.
    for (int i = 0; i < k; ++i) {
        Mat ab(n, db);
        ab.leftCols(n) = sys.A(i);
        ab.rightCols(p) = sys.B(i);
        const Mat ddt = sys.D(i) * sys.D(i).transpose();
        for (Eigen::Index c = 0; c < n; ++c) {
            for (Eigen::Index r = c; r < n; ++r) {
                prob.conic.A.block(row, i * svb, 1, svb) = entry_functional(ab, r, c).transpose();
                if (i + 1 < k) {
                    Mat indicator = Mat::Zero(db, db);
                    indicator(r, c) = 0.5;
                    indicator(c, r) += 0.5;
                    prob.conic.A.block(row, (i + 1) * svb, 1, svb) -= svec(indicator).transpose();
                    prob.conic.b[row] = -ddt(r, c);
                } else {
                    prob.conic.b[row] = sigmaK.mat()(r, c) - ddt(r, c);
                }
                ++row;
            }
        }
    }
    prob.conic.validate();
    return prob;
}

SdpSolution solve_steering_sdp(const SdpProblem& prob, const SolverConfig& cfg) {
    const ConicSolution conic = solve_conic(prob.conic, cfg);
    SdpSolution sol;
    sol.status = conic.status;
    sol.objective = conic.objective;
    sol.rel_primal = conic.rel_primal;
    sol.rel_gap = conic.rel_gap;
    sol.iterations = conic.iterations;
    sol.message = conic.message;
    if (conic.status != SolveStatus::kOptimal) {
        return sol;
    }

    const Eigen::Index n = prob.n;
    const Eigen::Index p = prob.p;
    const Eigen::Index svb = svec_dim(n + p);
    sol.sigma.resize(static_cast<size_t>(prob.k) + 1);
    sol.U.resize(static_cast<size_t>(prob.k));
    sol.Y.resize(static_cast<size_t>(prob.k));
    for (int i = 0; i < prob.k; ++i) {
        const Mat z = smat(conic.x.segment(i * svb, svb), n + p);
        sol.sigma[static_cast<size_t>(i)] = z.topLeftCorner(n, n);
        sol.U[static_cast<size_t>(i)] = z.bottomLeftCorner(p, n);
        sol.Y[static_cast<size_t>(i)] = z.bottomRightCorner(p, p);
    }
    sol.sigma[static_cast<size_t>(prob.k)] = prob.sigmaK;
    return sol;
}

DiscretePolicy recover_policy(const DiscreteLtvSystem& sys, const SdpSolution& solution) {
    if (solution.status != SolveStatus::kOptimal) {
        throw std::invalid_argument("recover_policy: solution is not optimal");
    }
    if (!solution.U.empty() &&
        (solution.U[0].rows() != sys.p() || solution.U[0].cols() != sys.n())) {
        throw std::invalid_argument("recover_policy: solution does not match system dimensions");
    }
    DiscretePolicy pol;
    const int k = static_cast<int>(solution.U.size());
    pol.F.reserve(static_cast<size_t>(k));
    pol.V.reserve(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) {
        const Mat& sigma = solution.sigma[static_cast<size_t>(i)];
        const Mat f = solution.U[static_cast<size_t>(i)] * pinv(sigma);
        Mat v = solution.Y[static_cast<size_t>(i)] - f * sigma * f.transpose();
        v = 0.5 * (v + v.transpose());
        Eigen::SelfAdjointEigenSolver<Mat> es(v);
        if (es.eigenvalues().minCoeff() < -1e-7) {
            throw std::runtime_error("recover_policy: V_" + std::to_string(i) +
                                     " has eigenvalue " + std::to_string(es.eigenvalues().minCoeff()) +
                                     "; solution inconsistent");
        }
        const Vec lam = es.eigenvalues().cwiseMax(0.0);
        pol.F.push_back(f);
        pol.V.push_back(es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose());
    }
    return pol;
}

nlohmann::json SdpProblem::to_json() const {
    nlohmann::json doc;
    doc["k"] = k;
    doc["n"] = n;
    doc["p"] = p;
    doc["blocks"] = conic.blocks;
    doc["objective"] = std::vector<double>(conic.c.data(), conic.c.data() + conic.c.size());
    doc["b"] = std::vector<double>(conic.b.data(), conic.b.data() + conic.b.size());
    nlohmann::json trips = nlohmann::json::array();
    for (Eigen::Index i = 0; i < conic.A.rows(); ++i) {
        for (Eigen::Index j = 0; j < conic.A.cols(); ++j) {
            if (conic.A(i, j) != 0.0) {
                trips.push_back({i, j, conic.A(i, j)});
            }
        }
    }
    doc["equalities"] = trips;
    doc["svec_offdiag_scale"] = "sqrt(2)";
    return doc;
}

}  // namespace covsteer
