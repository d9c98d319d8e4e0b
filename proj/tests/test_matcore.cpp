#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <limits>

#include "covsteer/matcore.hpp"
#include "test_util.hpp"

using namespace covsteer;
using namespace covsteer::testutil;

namespace {

Mat mat2(double a, double b, double c, double d) {
    Mat m(2, 2);
    m << a, b, c, d;
    return m;
}

}  // namespace

TEST_CASE("is_psd") {
    CHECK(is_psd(Mat::Identity(2, 2), 1e-9));
    CHECK_FALSE(is_psd(mat2(1, 2, 2, 1), 1e-9));  // eigenvalues 3 and -1

    // terminal covariance of the worked example minus its noise floor
    const Mat m = mat2(0.3, 0.14, 0.14, 1.2179);
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    REQUIRE(es.eigenvalues().minCoeff() > 0.0);
    CHECK(is_psd(m, 1e-9));

    Mat bad = mat2(1, 0, 0, 1);
    bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(is_psd(bad, 1e-9), std::invalid_argument);
}

TEST_CASE("psd_sqrt") {
    CHECK((psd_sqrt(Mat::Identity(3, 3)) - Mat::Identity(3, 3)).norm() < 1e-12);

    Mat d49 = Mat::Zero(2, 2);
    d49(0, 0) = 4.0;
    d49(1, 1) = 9.0;
    Mat expect = Mat::Zero(2, 2);
    expect(0, 0) = 2.0;
    expect(1, 1) = 3.0;
    CHECK((psd_sqrt(d49) - expect).norm() < 1e-12);

    // eigenvalues 1 and 3; sqrt = [[(sqrt3+1)/2, (sqrt3-1)/2], ...]
    const double s3 = std::sqrt(3.0);
    const Mat r = psd_sqrt(mat2(2, 1, 1, 2));
    CHECK((r - mat2((s3 + 1) / 2, (s3 - 1) / 2, (s3 - 1) / 2, (s3 + 1) / 2)).norm() < 1e-10);

    CHECK_THROWS_AS(psd_sqrt(mat2(1, 2, 2, 1)), std::domain_error);

    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const Mat m = rand_psd(rng, 4);
        const Mat root = psd_sqrt(m);
        CHECK((root * root - m).norm() <= 1e-10 * (1.0 + m.norm()));
        CHECK(is_psd(root, 1e-9));
    }
}

TEST_CASE("pinv") {
    Mat d20 = Mat::Zero(2, 2);
    d20(0, 0) = 2.0;
    Mat expect = Mat::Zero(2, 2);
    expect(0, 0) = 0.5;
    CHECK((pinv(d20) - expect).norm() < 1e-12);

    CHECK(pinv(Mat::Zero(3, 2)).norm() == 0.0);

    Mat col(2, 1);
    col << 1.0, 1.0;
    Mat row(1, 2);
    row << 0.5, 0.5;
    CHECK((pinv(col) - row).norm() < 1e-12);

    // Moore-Penrose identities on random rank-deficient matrices
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Mat m = rand_mat(rng, 4, 3) * rand_mat(rng, 3, 5);
        const Mat mp = pinv(m);
        const double scale = 1.0 + m.norm();
        CHECK((m * mp * m - m).norm() <= 1e-9 * scale);
        CHECK((mp * m * mp - mp).norm() <= 1e-9 * (1.0 + mp.norm()));
        CHECK(((m * mp) - (m * mp).transpose()).norm() <= 1e-9 * scale);
        CHECK(((mp * m) - (mp * m).transpose()).norm() <= 1e-9 * scale);
    }
}

TEST_CASE("range_projector and range_inclusion") {
    Mat d20 = Mat::Zero(2, 2);
    d20(0, 0) = 2.0;
    CHECK((range_projector(d20, RangePart::kRange).mat() - mat2(1, 0, 0, 0)).norm() < 1e-12);
    CHECK((range_projector(d20, RangePart::kComplement).mat() - mat2(0, 0, 0, 1)).norm() < 1e-12);

    Mat m2(2, 1);
    m2 << 1.0, 0.0;
    CHECK(range_inclusion(m2, d20));
    CHECK_FALSE(range_inclusion(Mat::Identity(2, 2), d20));
    CHECK_THROWS_AS(range_inclusion(Mat::Zero(3, 1), d20), std::invalid_argument);

    // projector laws on random matrices
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 4);
        const Eigen::Index r = 1 + static_cast<Eigen::Index>(rng() % n);
        const Mat m = rand_mat(rng, n, r);
        const Mat p = range_projector(m, RangePart::kRange).mat();
        const Mat pc = range_projector(m, RangePart::kComplement).mat();
        CHECK((p - p.transpose()).norm() <= 1e-10);
        CHECK((p * p - p).norm() <= 1e-10);
        CHECK((pc * m).norm() <= 1e-10 * (1.0 + m.norm()));
        CHECK((p + pc - Mat::Identity(n, n)).norm() <= 1e-10);
    }
}

TEST_CASE("gen_schur") {
    CHECK(gen_schur(SymMatrix(mat2(1, 1, 1, 1)), 1).mat()(0, 0) == doctest::Approx(0.0));
    CHECK(gen_schur(SymMatrix(Mat::Identity(2, 2)), 1).mat()(0, 0) == doctest::Approx(1.0));
    CHECK(gen_schur(SymMatrix(mat2(0, 0, 0, 1)), 1).mat()(0, 0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(gen_schur(SymMatrix(Mat::Identity(2, 2)), 2), std::invalid_argument);
}

TEST_CASE("block PSD test equivalence") {
    // is_psd agrees with the three-part block test M1 >= 0, range M2 within range M1,
    // and the generalized Schur complement >= 0.
    std::mt19937_64 rng(17);
    int positives = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index n1 = 1 + static_cast<Eigen::Index>(rng() % 3);
        const Eigen::Index n2 = 1 + static_cast<Eigen::Index>(rng() % 3);
        const Eigen::Index n = n1 + n2;
        Mat m;
        switch (trial % 4) {
            case 0:
                m = rand_psd(rng, n);
                break;
            case 1:
                m = rand_psd(rng, n, 1 + static_cast<Eigen::Index>(rng() % n));
                break;
            case 2:
                m = rand_sym(rng, n);
                break;
            default: {
                // PSD top block, off-diagonal mass outside its range
                m = Mat::Zero(n, n);
                m.topLeftCorner(n1, n1) = rand_psd(rng, n1, std::max<Eigen::Index>(1, n1 - 1));
                m.topRightCorner(n1, n2) = rand_mat(rng, n1, n2);
                m.bottomLeftCorner(n2, n1) = m.topRightCorner(n1, n2).transpose();
                m.bottomRightCorner(n2, n2) = rand_psd(rng, n2);
                break;
            }
        }
        const bool direct = is_psd(m, 1e-8);
        const Mat m1 = m.topLeftCorner(n1, n1);
        const Mat m2 = m.topRightCorner(n1, n2);
        const bool part = is_psd(m1, 1e-8) && range_inclusion(m2, m1) &&
                          is_psd(gen_schur(SymMatrix(m), n1).mat(), 1e-8);
        CHECK(direct == part);
        positives += direct ? 1 : 0;
    }
    CHECK(positives > 20);
    CHECK(positives < 180);
}

TEST_CASE("product spectrum matches symmetrized spectrum") {
    // spec(M1 M2) = spec(M1^{1/2} M2 M1^{1/2}) with real eigenvalues for M1 >= 0.
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 300; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 4);
        const Mat m1 = rand_psd(rng, n, 1 + static_cast<Eigen::Index>(rng() % n));
        const Mat m2 = rand_sym(rng, n);

        Eigen::EigenSolver<Mat> es(m1 * m2);
        CHECK(es.eigenvalues().imag().cwiseAbs().maxCoeff() <= 1e-8 * (1.0 + (m1 * m2).norm()));
        Vec direct = es.eigenvalues().real();
        std::sort(direct.data(), direct.data() + direct.size());

        Eigen::SelfAdjointEigenSolver<Mat> ess(psd_sqrt(m1) * m2 * psd_sqrt(m1));
        Vec symm = ess.eigenvalues();
        std::sort(symm.data(), symm.data() + symm.size());

        CHECK((direct - symm).cwiseAbs().maxCoeff() <= 1e-8 * (1.0 + symm.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("woodbury_capped") {
    Mat w = Mat::Zero(2, 2);
    w(0, 0) = 1.0;
    Mat gamma(2, 1);
    gamma << 0.0, 1.0;
    CHECK((woodbury_capped(PsdMatrix(w), gamma).mat() - mat2(1, 0, 0, 0)).norm() < 1e-12);

    // empty Gamma reduces to W W^{-1} W
    CHECK((woodbury_capped(PsdMatrix(Mat::Identity(2, 2)), Mat(2, 0)).mat() - Mat::Identity(2, 2))
              .norm() < 1e-12);

    {
        Mat w2 = Mat::Zero(2, 2);
        w2(0, 0) = 2.0;
        Mat g2(2, 1);
        g2 << 1.0, 1.0;
        const Mat dense = w2 * (w2 + g2 * g2.transpose()).inverse() * w2;
        CHECK((woodbury_capped(PsdMatrix(w2), g2).mat() - dense).norm() < 1e-12);
    }

    Mat wsing = Mat::Zero(2, 2);
    CHECK_THROWS_AS(woodbury_capped(PsdMatrix(wsing), Mat(2, 0)), std::runtime_error);

    // closed form vs dense inverse on random lemma-coordinate instances
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 300; ++trial) {
        const Eigen::Index m = 2 + static_cast<Eigen::Index>(rng() % 4);
        const Eigen::Index r = static_cast<Eigen::Index>(rng() % (m + 1));
        const Eigen::Index l = (m - r) + static_cast<Eigen::Index>(rng() % 3);
        Mat w3 = Mat::Zero(m, m);
        if (r > 0) w3.topLeftCorner(r, r) = rand_pd(rng, r);
        const Mat g3 = l > 0 ? rand_mat(rng, m, l) : Mat(m, 0);

        Mat stacked(m, m + l);
        stacked.leftCols(m) = w3;
        if (l > 0) stacked.rightCols(l) = g3;
        Eigen::JacobiSVD<Mat> svd(stacked);
        if (svd.singularValues().minCoeff() < 1e-6) continue;

        const Mat dense = w3 * (w3 + g3 * g3.transpose()).inverse() * w3;
        const Mat closed = woodbury_capped(PsdMatrix(w3), g3).mat();
        CHECK((closed - dense).norm() <= 1e-8 * (1.0 + dense.norm()));
    }
}

TEST_CASE("typed wrappers enforce invariants") {
    const Mat skew = mat2(1, 0.5, -0.5, 1);
    const SymMatrix sym(skew);
    CHECK((sym.mat() - sym.mat().transpose()).norm() == 0.0);

    CHECK_THROWS_AS(PsdMatrix(mat2(1, 2, 2, 1)), std::invalid_argument);
    CHECK_THROWS_AS(Projector(mat2(1, 1, 1, 1)), std::invalid_argument);  // not idempotent
    CHECK_NOTHROW(Projector(mat2(0.5, 0.5, 0.5, 0.5)));
}
