#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "covsteer/dsys.hpp"
#include "test_util.hpp"

using namespace covsteer;
using namespace covsteer::testutil;

TEST_CASE("transition matrix") {
    const DiscreteLtvSystem sys = example_system();
    CHECK((phi(sys, 5, 5) - Mat::Identity(2, 2)).norm() == 0.0);

    Mat expect(2, 2);
    expect << 1.0, 0.392, 0.0, 0.9216;  // A^2; (1,2) entry 0.2 + 0.2*0.96
    CHECK((phi(sys, 2, 0) - expect).norm() < 1e-14);

    const DiscreteLtvSystem scalar =
        DiscreteLtvSystem::lti(2.0 * Mat::Identity(1, 1), Mat::Identity(1, 1), Mat::Zero(1, 1), 5);
    CHECK(phi(scalar, 3, 0)(0, 0) == doctest::Approx(8.0));

    CHECK_THROWS_AS(phi(sys, 1, 3), std::out_of_range);

    // semigroup on random time-varying systems
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Mat> as, bs, ds;
        for (int j = 0; j < 6; ++j) {
            as.push_back(rand_mat(rng, 3, 3));
            bs.push_back(rand_mat(rng, 3, 2));
            ds.push_back(rand_mat(rng, 3, 1));
        }
        const DiscreteLtvSystem tv = DiscreteLtvSystem::ltv(as, bs, ds);
        const int i = static_cast<int>(rng() % 3);
        const int j = i + static_cast<int>(rng() % 2);
        const int k = j + static_cast<int>(rng() % 3);
        CHECK((phi(tv, k, i) - phi(tv, k, j) * phi(tv, j, i)).norm() <= 1e-12 * (1.0 + phi(tv, k, i).norm()));
    }
}

TEST_CASE("reachability Gramian") {
    const DiscreteLtvSystem sys = example_system();
    CHECK(reach_gramian(sys, 4, 4).mat().norm() == 0.0);

    Mat expect(2, 2);
    expect << 2.0, 0.0, 0.0, 0.0;  // A B = e1, so two rank-one e1 terms
    CHECK((reach_gramian(sys, 2, 0).mat() - expect).norm() < 1e-14);

    const DiscreteLtvSystem ones =
        DiscreteLtvSystem::lti(Mat::Identity(1, 1), Mat::Identity(1, 1), Mat::Zero(1, 1), 5);
    CHECK(reach_gramian(ones, 3, 0).mat()(0, 0) == doctest::Approx(3.0));

    // recursion G(k+1, i) = A G(k, i) A^T + B B^T
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 30; ++trial) {
        const DiscreteLtvSystem r = rand_discrete_lti(rng, 3, 2, 1, 12);
        const int i = static_cast<int>(rng() % 4);
        const int k = i + static_cast<int>(rng() % (12 - i));
        const Mat lhs = reach_gramian(r, k + 1, i).mat();
        const Mat rhs = r.A(k) * reach_gramian(r, k, i).mat() * r.A(k).transpose() +
                        r.B(k) * r.B(k).transpose();
        CHECK((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
    }

    // range nesting: range G(k, j) within range G(k, i) for i <= j
    for (int trial = 0; trial < 30; ++trial) {
        const DiscreteLtvSystem r = rand_discrete_lti(rng, 3, 1, 1, 8);
        const int i = static_cast<int>(rng() % 3);
        const int j = i + static_cast<int>(rng() % 3);
        const int k = j + 1 + static_cast<int>(rng() % 3);
        CHECK(range_inclusion(reach_gramian(r, k, j).mat(), reach_gramian(r, k, i).mat(), 1e-7));
    }
}

TEST_CASE("controllability Gramian") {
    const DiscreteLtvSystem sys = example_system();
    Mat expect(2, 2);
    expect << 1.0, 0.0, 0.0, 0.0;  // A^{-1} B = e1
    CHECK((ctrl_gramian(sys, 1, 0).mat() - expect).norm() < 1e-14);
    CHECK(ctrl_gramian(sys, 4, 4).mat().norm() == 0.0);

    const DiscreteLtvSystem scalar =
        DiscreteLtvSystem::lti(2.0 * Mat::Identity(1, 1), Mat::Identity(1, 1), Mat::Zero(1, 1), 5);
    CHECK(ctrl_gramian(scalar, 1, 0).mat()(0, 0) == doctest::Approx(0.25));

    const DiscreteLtvSystem sing =
        DiscreteLtvSystem::lti(Mat::Zero(2, 2), Mat::Identity(2, 2), Mat::Zero(2, 2), 3);
    CHECK_THROWS_AS(ctrl_gramian(sing, 2, 0), std::runtime_error);

    // Ghat(k,i) = Phi(i,k) G(k,i) Phi(i,k)^T on random invertible systems
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 30; ++trial) {
        const DiscreteLtvSystem r = rand_discrete_lti(rng, 3, 2, 2, 6);
        const int i = static_cast<int>(rng() % 3);
        const int k = i + 1 + static_cast<int>(rng() % 3);
        const Mat phi_ik = phi(r, k, i).inverse();
        const Mat expect_hat = phi_ik * reach_gramian(r, k, i).mat() * phi_ik.transpose();
        CHECK((ctrl_gramian(r, k, i).mat() - expect_hat).norm() <= 1e-9 * (1.0 + expect_hat.norm()));
    }
}

TEST_CASE("covariance propagation") {
    const DiscreteLtvSystem sys = example_system();
    const PsdMatrix sigma0(example_sigma0());

    SUBCASE("unforced, no noise equals transition transport") {
        const DiscreteLtvSystem clean = DiscreteLtvSystem::lti(sys.A(0), sys.B(0), Mat::Zero(2, 2), 30);
        const CovTrajectory traj = propagate_cov(clean, sigma0, DiscretePolicy::zero(clean, 5), 5);
        const Mat expect = phi(clean, 5, 0) * sigma0.mat() * phi(clean, 5, 0).transpose();
        CHECK((traj.sigmas.back().mat() - expect).norm() <= 1e-12 * (1.0 + expect.norm()));
    }

    SUBCASE("one noisy step pins the unforced coordinate") {
        const CovTrajectory traj = propagate_cov(sys, sigma0, DiscretePolicy::zero(sys, 1), 1);
        CHECK(traj.sigmas.back().mat()(1, 1) == doctest::Approx(0.96 * 0.96 * 3.0 + 0.09));  // 2.8548
    }

    SUBCASE("scalar closed loop with control noise") {
        const DiscreteLtvSystem scalar =
            DiscreteLtvSystem::lti(Mat::Identity(1, 1), Mat::Identity(1, 1), Mat::Zero(1, 1), 3);
        DiscretePolicy pol;
        pol.F = {Mat::Identity(1, 1)};
        pol.V = {Mat::Identity(1, 1)};
        const CovTrajectory traj = propagate_cov(scalar, PsdMatrix(Mat::Identity(1, 1)), pol, 1);
        CHECK(traj.sigmas.back().mat()(0, 0) == doctest::Approx(5.0));  // (1+1)^2 * 1 + 1
    }

    SUBCASE("non-PSD control covariance is rejected") {
        DiscretePolicy pol = DiscretePolicy::zero(sys, 1);
        pol.V[0] = -Mat::Identity(1, 1);
        CHECK_THROWS_AS(propagate_cov(sys, sigma0, pol, 1), std::invalid_argument);
    }

    SUBCASE("mean recursion rides along") {
        Vec mu0(2);
        mu0 << 1.0, -1.0;
        const CovTrajectory traj = propagate_cov(sys, sigma0, DiscretePolicy::zero(sys, 3), 3, mu0);
        REQUIRE(traj.means.size() == 4);
        CHECK((traj.means.back() - phi(sys, 3, 0) * mu0).norm() <= 1e-12);
    }

    SUBCASE("noise floor") {
        // any propagated Sigma_k dominates D_{k-1} D_{k-1}^T
        std::mt19937_64 rng(43);
        for (int trial = 0; trial < 40; ++trial) {
            const DiscreteLtvSystem r = rand_discrete_lti(rng, 2, 1, 2, 6);
            const int k = 1 + static_cast<int>(rng() % 6);
            const CovTrajectory traj =
                propagate_cov(r, PsdMatrix(rand_psd(rng, 2)), rand_policy(rng, r, k), k);
            const Mat floor = r.D(k - 1) * r.D(k - 1).transpose();
            CHECK(is_psd(traj.sigmas.back().mat() - floor, 1e-8));
        }
    }
}
