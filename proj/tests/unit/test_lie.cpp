#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "syncnav/errors.hpp"
#include "syncnav/lie.hpp"

using namespace syncnav;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs(const Mat5& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Skew, CrossProductAxes) {
  EXPECT_TRUE((skew(Vec3::UnitZ()) * Vec3::UnitX()).isApprox(Vec3::UnitY()));
  EXPECT_EQ(skew(Vec3::Zero()), Mat3::Zero());
  const Vec3 v(1, 2, 3);
  EXPECT_EQ(skew(v).transpose(), -skew(v));
}

TEST(Skew, MatchesCrossForRandomVectors) {
  oracle::Random rnd(1);
  for (int i = 0; i < 100; ++i) {
    const Vec3 a = rnd.vec3(5.0);
    const Vec3 b = rnd.vec3(5.0);
    EXPECT_LT((skew(a) * b - a.cross(b)).norm(), 1e-12);
  }
}

TEST(Unskew, RoundTripAndRejection) {
  EXPECT_EQ(unskew(skew(Vec3(1, 2, 3))), Vec3(1, 2, 3));
  EXPECT_EQ(unskew(Mat3::Zero()), Vec3::Zero());
  EXPECT_THROW(unskew(Mat3::Identity()), std::invalid_argument);
}

TEST(ExpSO3, BasicCases) {
  EXPECT_EQ(Rot3::exp(Vec3::Zero()).matrix(), Mat3::Identity());
  EXPECT_LT((Rot3::exp(0.5 * kPi * Vec3::UnitZ()) * Vec3::UnitX() - Vec3::UnitY()).norm(), 1e-12);
}

TEST(ExpSO3, TraceNearHalfTurnMatchesDenseSeries) {
  const Vec3 w = 0.99 * kPi * Vec3::UnitX();
  const double expected = oracle::dense_exp3(skew(w)).trace();
  EXPECT_NEAR(expected, -0.999013, 1e-6);
  EXPECT_NEAR(Rot3::exp(w).trace(), expected, 1e-12);
}

TEST(ExpSO3, SmallAngleBranchIsContinuous) {
  const Vec3 axis = Vec3(1, -2, 0.5).normalized();
  const Rot3 below = Rot3::exp(0.999e-6 * axis);
  const Rot3 above = Rot3::exp(1.001e-6 * axis);
  EXPECT_LT((below.matrix() - above.matrix()).norm(), 1e-8);
  EXPECT_LT((below.matrix() - oracle::dense_exp3(skew(0.999e-6 * axis))).norm(), 1e-15);
}

TEST(Rot3, FromMatrixValidates) {
  EXPECT_NO_THROW(Rot3::from_matrix(Mat3::Identity()));
  EXPECT_THROW(Rot3::from_matrix(2.0 * Mat3::Identity()), std::invalid_argument);
  EXPECT_THROW(Rot3::from_matrix(-Mat3::Identity()), std::invalid_argument);
}

TEST(Rot3, OrthogonalityHeldOverManyCompositions) {
  oracle::Random rnd(2);
  Rot3 r;
  for (int i = 0; i < 100000; ++i) {
    r = (r * Rot3::exp(rnd.vec3(0.3))).renormalized();
    ASSERT_LT(r.orthogonality_error(), 1e-9) << "step " << i;
  }
  EXPECT_NEAR(r.matrix().determinant(), 1.0, 1e-9);
}

TEST(Rot3, ProjectRecoversPerturbedRotation) {
  oracle::Random rnd(3);
  const Rot3 r = rnd.rotation();
  const Mat3 noisy = r.matrix() + 1e-6 * Mat3::Ones();
  EXPECT_LT((Rot3::project(noisy).matrix() - r.matrix()).norm(), 1e-5);
  EXPECT_LT(Rot3::project(noisy).orthogonality_error(), 1e-12);
}

TEST(ExpSE23, IdentityAndPureTranslation) {
  EXPECT_EQ(max_abs(exp_se23(SE23Tangent::zero()).matrix() - Mat5::Identity()), 0.0);
  Mat32 w;
  w << 1, 2, 3, 4, 5, 6;
  const SE23 x = exp_se23({Vec3::Zero(), w});
  EXPECT_EQ(x.rotation.matrix(), Mat3::Identity());
  EXPECT_EQ(x.vblock, w);
}

TEST(ExpSE23, UnitYawWithVelocityColumn) {
  SE23Tangent xi;
  xi.omega = Vec3::UnitZ();
  xi.wblock.col(0) = Vec3::UnitX();
  EXPECT_LT(max_abs(exp_se23(xi).matrix() - oracle::dense_exp(xi.matrix())), 1e-10);
}

TEST(ExpSE23, AgreesWithDenseExponentialOnRandomTangents) {
  oracle::Random rnd(4);
  for (int i = 0; i < 1000; ++i) {
    SE23Tangent xi = rnd.se23_tangent(1.0);
    const double n = std::sqrt(xi.omega.squaredNorm() + xi.wblock.squaredNorm());
    xi = (rnd.uniform(0.0, 5.0) / n) * xi;
    const Mat5 ref = oracle::dense_exp(xi.matrix());
    ASSERT_LT(max_abs(exp_se23(xi).matrix() - ref), 1e-10 * std::max(1.0, max_abs(ref)));
  }
}

TEST(ExpSE23, SmallAngleTaylorBranch) {
  SE23Tangent xi;
  xi.omega = Vec3(3e-7, -2e-7, 1e-7);
  xi.wblock << 1, 2, 3, 4, 5, 6;
  EXPECT_LT(max_abs(exp_se23(xi).matrix() - oracle::dense_exp(xi.matrix())), 1e-13);
}

TEST(ExpSIM23, DecoupledScalingBlock) {
  SIM23Tangent xi;
  xi.sblock = Vec2(0.3, -1.2).asDiagonal();
  const SIM23 z = exp_sim23(xi);
  EXPECT_NEAR(z.ablock(0, 0), std::exp(0.3), 1e-14);
  EXPECT_NEAR(z.ablock(1, 1), std::exp(-1.2), 1e-14);
  EXPECT_EQ(z.ablock(0, 1), 0.0);
  EXPECT_EQ(max_abs(exp_sim23(SIM23Tangent::zero()).matrix() - Mat5::Identity()), 0.0);
}

TEST(ExpSIM23, AgreesWithDenseExponentialAndInverts) {
  oracle::Random rnd(5);
  for (int i = 0; i < 1000; ++i) {
    SIM23Tangent xi = rnd.sim23_tangent(1.0);
    const double n = xi.matrix().norm();
    xi = (rnd.uniform(0.0, 5.0) / n) * xi;
    const Mat5 ref = oracle::dense_exp(xi.matrix());
    ASSERT_LT(max_abs(exp_sim23(xi).matrix() - ref), 1e-10 * std::max(1.0, max_abs(ref)));
    const Mat5 prod = (exp_sim23(xi) * exp_sim23(-xi)).matrix();
    ASSERT_LT(max_abs(prod - Mat5::Identity()), 1e-10);
  }
}

TEST(Compose, IdentityInverseAndTranslationSubgroup) {
  oracle::Random rnd(6);
  const SE23 x = rnd.se23();
  EXPECT_LT(max_abs((x * SE23::identity()).matrix() - x.matrix()), 1e-15);
  EXPECT_LT(max_abs((x * inverse(x)).matrix() - Mat5::Identity()), 1e-10);

  SE23 a, b;
  a.vblock << 1, 2, 3, 4, 5, 6;
  b.vblock << -1, 0.5, 2, 2, 0, 1;
  EXPECT_EQ((a * b).vblock, a.vblock + b.vblock);
}

TEST(Compose, MatchesDenseProductForBothGroups) {
  oracle::Random rnd(7);
  for (int i = 0; i < 200; ++i) {
    const SE23 x = rnd.se23();
    const SE23 y = rnd.se23();
    ASSERT_LT(max_abs((x * y).matrix() - x.matrix() * y.matrix()), 1e-10);
    const SIM23 z = rnd.sim23();
    const SIM23 w = rnd.sim23();
    ASSERT_LT(max_abs((z * w).matrix() - z.matrix() * w.matrix()), 1e-10);
  }
}

TEST(Inverse, DiagonalScalingAndInvolution) {
  SIM23 z;
  z.ablock = Vec2(2.0, 10.0).asDiagonal();
  const SIM23 zi = inverse(z);
  EXPECT_NEAR(zi.ablock(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(zi.ablock(1, 1), 0.1, 1e-15);
  EXPECT_EQ(max_abs(inverse(SIM23::identity()).matrix() - Mat5::Identity()), 0.0);

  oracle::Random rnd(8);
  for (int i = 0; i < 100; ++i) {
    const SIM23 r = rnd.sim23();
    ASSERT_LT(max_abs(inverse(inverse(r)).matrix() - r.matrix()), 1e-10);
    ASSERT_LT(max_abs(r.matrix() * inverse(r).matrix() - Mat5::Identity()), 1e-10);
  }
}

TEST(Inverse, SingularScalingRejected) {
  SIM23 z;
  z.ablock << 1.0, 2.0, 2.0, 4.0;
  EXPECT_THROW(inverse(z), SingularAuxiliaryError);
  try {
    inverse(z);
  } catch (const SingularAuxiliaryError& e) {
    EXPECT_EQ(e.determinant(), 0.0);
  }
}

TEST(Conjugate, IdentitiesAndDenseAgreement) {
  oracle::Random rnd(9);
  const SE23 x = rnd.se23();
  const SIM23 z = rnd.sim23();
  EXPECT_LT(max_abs(conjugate(SIM23::identity(), x).matrix() - x.matrix()), 1e-13);
  EXPECT_LT(max_abs(conjugate(z, SE23::identity()).matrix() - Mat5::Identity()), 1e-12);
  const Mat5 dense = z.matrix() * x.matrix() * z.matrix().inverse();
  EXPECT_LT(max_abs(conjugate(z, x).matrix() - dense), 1e-10);
}

TEST(Conjugate, IsAnAutomorphism) {
  oracle::Random rnd(10);
  for (int i = 0; i < 200; ++i) {
    const SIM23 z = rnd.sim23();
    const SE23 x = rnd.se23();
    const SE23 y = rnd.se23();
    const Mat5 lhs = conjugate(z, x * y).matrix();
    const Mat5 rhs = (conjugate(z, x) * conjugate(z, y)).matrix();
    ASSERT_LT(max_abs(lhs - rhs), 1e-9 * std::max(1.0, max_abs(lhs)));
  }
}

TEST(Adjoint, IdentitiesAndDenseAgreement) {
  oracle::Random rnd(11);
  const SE23Tangent d = rnd.se23_tangent(2.0);
  const SIM23 z = rnd.sim23();
  EXPECT_LT(max_abs(adjoint(SIM23::identity(), d).matrix() - d.matrix()), 1e-15);
  EXPECT_EQ(max_abs(adjoint(z, SE23Tangent::zero()).matrix()), 0.0);
  for (int i = 0; i < 200; ++i) {
    const SIM23 zz = rnd.sim23();
    const SE23Tangent dd = rnd.se23_tangent(2.0);
    const Mat5 dense = zz.matrix() * dd.matrix() * zz.matrix().inverse();
    ASSERT_LT(max_abs(adjoint(zz, dd).matrix() - dense), 1e-10);
    ASSERT_LT((dense.bottomRightCorner<2, 2>().cwiseAbs().maxCoeff()), 1e-12);
  }
}

TEST(Adjoint, IsLinear) {
  oracle::Random rnd(12);
  for (int i = 0; i < 100; ++i) {
    const SIM23 z = rnd.sim23();
    const SE23Tangent d1 = rnd.se23_tangent(2.0);
    const SE23Tangent d2 = rnd.se23_tangent(2.0);
    const double a = rnd.uniform(-3, 3);
    const double b = rnd.uniform(-3, 3);
    const Mat5 lhs = adjoint(z, a * d1 + b * d2).matrix();
    const Mat5 rhs = (a * adjoint(z, d1) + b * adjoint(z, d2)).matrix();
    ASSERT_LT(max_abs(lhs - rhs), 1e-12 * std::max(1.0, max_abs(lhs)));
  }
}

TEST(Embedding, FromMatrixRoundTripAndValidation) {
  oracle::Random rnd(13);
  const SE23 x = rnd.se23();
  EXPECT_EQ(max_abs(SE23::from_matrix(x.matrix()).matrix() - x.matrix()), 0.0);
  Mat5 bad = x.matrix();
  bad(3, 4) = 0.5;
  EXPECT_THROW(SE23::from_matrix(bad), std::invalid_argument);
  const SIM23 z = rnd.sim23();
  EXPECT_EQ(max_abs(SIM23::from_matrix(z.matrix()).matrix() - z.matrix()), 0.0);
  Mat5 badz = z.matrix();
  badz(4, 0) = 1.0;
  EXPECT_THROW(SIM23::from_matrix(badz), std::invalid_argument);
}
