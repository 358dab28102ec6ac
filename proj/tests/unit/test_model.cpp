#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "syncnav/errors.hpp"
#include "syncnav/model.hpp"

using namespace syncnav;

namespace {

constexpr double kPi = std::numbers::pi;

// Exact flow of the plant with inputs frozen at the midpoint of each step,
// written with dense exponentials.
SE23 dense_step(const SE23& x, const ImuInput& u, const WorldConstants& w, double dt) {
  const ConstantMatrices c = ConstantMatrices::from(w);
  const Mat5 left = oracle::dense_exp(dt * (c.G + c.D).matrix());
  const Mat5 right = oracle::dense_exp(dt * (input_to_tangent(u).matrix() - c.D.matrix()));
  return SE23::from_matrix(left * x.matrix() * right);
}

}  // namespace

TEST(NavToGroup, Embedding) {
  EXPECT_EQ(nav_to_group(NavState{}).matrix(), Mat5::Identity());
  NavState s{Rot3(), 25.0 * Vec3::UnitY(), 50.0 * Vec3::UnitX()};
  Mat32 expected;
  expected << 0, 50, 25, 0, 0, 0;
  EXPECT_EQ(nav_to_group(s).vblock, expected);
}

TEST(GroupToNav, RoundTrip) {
  oracle::Random rnd(21);
  const SE23 x = rnd.se23();
  const NavState s = group_to_nav(x);
  EXPECT_EQ(s.velocity, x.velocity());
  EXPECT_EQ(s.position, x.position());
  EXPECT_EQ(nav_to_group(s).matrix(), x.matrix());
  EXPECT_EQ(group_to_nav(SE23::identity()).position, Vec3::Zero());
}

TEST(InputToTangent, Layout) {
  const SE23Tangent xi = input_to_tangent({Vec3::UnitZ(), Vec3::Zero()});
  EXPECT_EQ(xi.omega, Vec3::UnitZ());
  EXPECT_EQ(xi.wblock, Mat32::Zero());
  EXPECT_EQ(input_to_tangent({}).matrix(), Mat5::Zero());
  EXPECT_EQ(input_to_tangent({Vec3(1, 2, 3), Vec3(4, 5, 6)}).wblock.col(1), Vec3::Zero());
}

TEST(ConstantMatrices, Blocks) {
  const ConstantMatrices c = ConstantMatrices::from(WorldConstants{});
  EXPECT_EQ(c.G.wblock.col(0), Vec3(0, 0, 9.81));
  EXPECT_EQ(c.G.sblock, Mat2::Zero());
  Mat2 sd;
  sd << 0, -1, 0, 0;
  EXPECT_EQ(c.D.sblock, sd);
  EXPECT_EQ(c.D.wblock, Mat32::Zero());
}

TEST(TruthDerivative, ExplicitDynamics) {
  const WorldConstants w;
  // Hover.
  const Mat5 hover = truth_derivative(SE23::identity(), {Vec3::Zero(), -w.gravity}, w);
  EXPECT_LT((hover.topRightCorner<3, 2>().norm()), 1e-15);

  NavState s;
  s.velocity = 25.0 * Vec3::UnitY();
  const Mat5 d = truth_derivative(nav_to_group(s), {}, w);
  EXPECT_LT((d.block<3, 1>(0, 4) - 25.0 * Vec3::UnitY()).norm(), 1e-15);
  EXPECT_LT((d.block<3, 1>(0, 3) - 9.81 * Vec3::UnitZ()).norm(), 1e-15);
}

TEST(TruthDerivative, BlockwiseMatchesExplicitForm) {
  oracle::Random rnd(22);
  const WorldConstants w;
  for (int i = 0; i < 1000; ++i) {
    const SE23 x = rnd.se23(30.0);
    const ImuInput u{rnd.vec3(2.0), rnd.vec3(20.0)};
    const Mat5 d = truth_derivative(x, u, w);
    const Mat3& R = x.rotation.matrix();
    ASSERT_LT((d.topLeftCorner<3, 3>() - R * skew(u.omega)).norm(), 1e-12);
    ASSERT_LT((d.block<3, 1>(0, 3) - (R * u.accel + w.gravity)).norm(), 1e-12);
    ASSERT_LT((d.block<3, 1>(0, 4) - x.velocity()).norm(), 1e-12);
    ASSERT_EQ(d.bottomRows<2>().norm(), 0.0);
  }
}

TEST(PropagateTruth, HoverIsStationary) {
  const WorldConstants w;
  oracle::Random rnd(23);
  NavState s;
  s.attitude = rnd.rotation();
  s.position = Vec3(1, 2, 3);
  const SE23 x = nav_to_group(s);
  const ImuInput u{Vec3::Zero(), -(s.attitude.transpose() * w.gravity)};
  const SE23 next = propagate_truth(x, u, w, 0.02);
  EXPECT_LT((next.matrix() - x.matrix()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PropagateTruth, MatchesDenseFlowAndStaysInGroup) {
  const WorldConstants w;
  oracle::Random rnd(24);
  for (int i = 0; i < 200; ++i) {
    const SE23 x = rnd.se23(30.0);
    const ImuInput u{rnd.vec3(2.0), rnd.vec3(20.0)};
    const SE23 next = propagate_truth(x, u, w, 0.05);
    const SE23 ref = dense_step(x, u, w, 0.05);
    ASSERT_LT((next.matrix() - ref.matrix()).cwiseAbs().maxCoeff(), 1e-10);
    ASSERT_LT(next.rotation.orthogonality_error(), 1e-9);
  }
}

TEST(PropagateTruth, FirstOrderConsistentWithDerivative) {
  const WorldConstants w;
  oracle::Random rnd(25);
  const SE23 x = rnd.se23(10.0);
  const ImuInput u{rnd.vec3(1.0), rnd.vec3(5.0)};
  const Mat5 d = truth_derivative(x, u, w);
  auto step = [&](double h) -> Mat5 { return (propagate_truth(x, u, w, h).matrix() - x.matrix()) / h; };
  const double e1 = (step(1e-3) - d).norm();
  const double e2 = (step(5e-4) - d).norm();
  // Richardson combination of the two difference quotients.
  const Mat5 extrapolated = 2.0 * step(5e-4) - step(1e-3);
  EXPECT_NEAR(e1 / e2, 2.0, 0.05);
  EXPECT_LT((extrapolated - d).norm(), 1e-5);
}

TEST(CircleReference, InitialConditions) {
  const CircleSample c = circle_reference(0.0);
  EXPECT_LT((c.state.velocity - 25.0 * Vec3::UnitY()).norm(), 1e-14);
  EXPECT_LT((c.state.position - 50.0 * Vec3::UnitX()).norm(), 1e-14);
  EXPECT_EQ(c.state.attitude.matrix(), Mat3::Identity());
  EXPECT_EQ(c.input.omega, Vec3::UnitZ());
}

TEST(CircleReference, CentripetalMagnitudeAndConsistency) {
  const WorldConstants w;
  for (double t = 0.0; t < 60.0; t += 0.7) {
    const CircleSample c = circle_reference(t, w);
    const Vec3 vdot = c.state.attitude * c.input.accel + w.gravity;
    EXPECT_NEAR(vdot.norm(), 12.5, 1e-12);
    // Central difference of the analytic velocity and position.
    const double h = 1e-5;
    const Vec3 dv = (circle_reference(t + h, w).state.velocity - circle_reference(t - h, w).state.velocity) / (2 * h);
    const Vec3 dp = (circle_reference(t + h, w).state.position - circle_reference(t - h, w).state.position) / (2 * h);
    EXPECT_LT((dv - vdot).norm(), 1e-6);
    EXPECT_LT((dp - c.state.velocity).norm(), 1e-6);
  }
}

namespace {

double track_error(double dt, double duration, double* terminal = nullptr) {
  const WorldConstants w;
  SE23 x = nav_to_group(circle_reference(0.0, w).state);
  const auto steps = static_cast<int>(std::lround(duration / dt));
  double worst = 0.0;
  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    x = propagate_truth(x, circle_reference(t + 0.5 * dt, w).input, w, dt);
    worst = std::max(worst, (x.position() - circle_reference((k + 1) * dt, w).state.position).norm());
  }
  if (terminal) *terminal = (x.position() - circle_reference(steps * dt, w).state.position).norm();
  return worst;
}

}  // namespace

TEST(CircleReference, OnePeriodReturnsToStart) {
  const WorldConstants w;
  const double period = 4.0 * kPi;
  SE23 x = nav_to_group(circle_reference(0.0, w).state);
  const double dt = 0.02;
  const auto steps = static_cast<int>(std::lround(period / dt));
  for (int k = 0; k < steps; ++k) x = propagate_truth(x, circle_reference(k * dt + 0.5 * dt, w).input, w, dt);
  EXPECT_LT((x.position() - circle_reference(steps * dt, w).state.position).norm(), 0.5);
  EXPECT_LT((x.position() - 50.0 * Vec3::UnitX()).norm(), 0.5 + 25.0 * std::abs(steps * dt - period));
}

TEST(CircleReference, FiftySecondsTrackedAtFiftyHertz) {
  EXPECT_LT(track_error(0.02, 50.0), 0.5);
}

TEST(CircleReference, HalvingStepAtLeastHalvesError) {
  double e1 = 0, e2 = 0;
  track_error(0.02, 50.0, &e1);
  track_error(0.01, 50.0, &e2);
  EXPECT_GT(e1 / e2, 2.0);
}

TEST(Measurements, Extraction) {
  EXPECT_EQ(measure_position(SE23::identity()), Vec3::Zero());
  EXPECT_EQ(measure_velocity(SE23::identity()), Vec3::Zero());
  const SE23 x = nav_to_group(circle_reference(0.0).state);
  EXPECT_LT((measure_position(x) - 50.0 * Vec3::UnitX()).norm(), 1e-14);
  EXPECT_LT((measure_velocity(x) - 25.0 * Vec3::UnitY()).norm(), 1e-14);
  oracle::Random rnd(26);
  NavState s{rnd.rotation(), rnd.vec3(3), rnd.vec3(3)};
  EXPECT_EQ(measure_position(nav_to_group(s)), s.position);
}

TEST(Measurements, Magnetometer) {
  WorldConstants w;
  w.mag_reference = Vec3(2.0, 0.0, 0.0);
  EXPECT_LT((measure_magnetometer(SE23::identity(), w) - Vec3::UnitX()).norm(), 1e-15);
  SE23 x;
  x.rotation = Rot3::exp(0.5 * kPi * Vec3::UnitZ());
  EXPECT_LT((measure_magnetometer(x, w) - Vec3(0, -1, 0)).norm(), 1e-12);
  oracle::Random rnd(27);
  for (int i = 0; i < 50; ++i) {
    x.rotation = rnd.rotation();
    EXPECT_NEAR(measure_magnetometer(x, w).norm(), 1.0, 1e-14);
  }
}

TEST(ZohFuse, HoldsLowRateSamples) {
  std::vector<ImuSample> imu;
  for (int k = 0; k < 350; ++k) imu.push_back({k / 350.0, {}});
  std::vector<GnssSample> gnss;
  for (int k = 0; k < 5; ++k) gnss.push_back({k / 5.0, Vec3(k, 0, 0), std::nullopt});
  const auto events = zoh_fuse(imu, gnss, {});
  ASSERT_EQ(events.size(), 350u);
  for (int j = 0; j < 5; ++j) {
    int count = 0;
    for (const auto& ev : events) count += ev.measurements.pos && ev.measurements.pos->x() == j;
    EXPECT_EQ(count, 70);
  }
  for (const auto& ev : events) EXPECT_FALSE(ev.measurements.mag.has_value());
}

TEST(ZohFuse, NoFixBeforeFirstGnss) {
  const std::vector<ImuSample> imu{{0.0, {}}, {0.1, {}}, {0.2, {}}};
  const std::vector<GnssSample> gnss{{0.15, Vec3::Ones(), Vec3::Zero()}};
  const auto events = zoh_fuse(imu, gnss, {{0.0, Vec3::UnitX()}});
  EXPECT_FALSE(events[0].measurements.pos.has_value());
  EXPECT_FALSE(events[1].measurements.pos.has_value());
  ASSERT_TRUE(events[2].measurements.pos.has_value());
  EXPECT_TRUE(events[2].measurements.vel.has_value());
  EXPECT_TRUE(events[0].measurements.mag.has_value());
}

TEST(ZohFuse, SingleSampleAfterFix) {
  const auto events = zoh_fuse({{1.0, {}}}, {{0.5, Vec3(1, 2, 3), std::nullopt}}, {});
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(*events[0].measurements.pos, Vec3(1, 2, 3));
}

TEST(ZohFuse, RejectsNonMonotoneStamps) {
  try {
    zoh_fuse({{0.0, {}}, {0.2, {}}, {0.1, {}}}, {}, {});
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("0.1"), std::string::npos);
  }
  EXPECT_THROW(zoh_fuse({{0.0, {}}}, {{1.0, Vec3::Zero(), {}}, {0.5, Vec3::Zero(), {}}}, {}), DataError);
}
