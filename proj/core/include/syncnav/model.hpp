#pragma once

// Ground-truth plant: strapdown INS kinematics in a flat local frame, their
// group-affine form on SE2(3), measurement models, the circular test flight
// and zero-order-hold fusion of multirate sensor streams.

#include <optional>
#include <vector>

#include "syncnav/lie.hpp"

namespace syncnav {

inline constexpr double kStandardGravity = 9.81;

struct NavState {
  Rot3 attitude;
  Vec3 velocity = Vec3::Zero();
  Vec3 position = Vec3::Zero();
};

struct ImuInput {
  Vec3 omega = Vec3::Zero();  // rad/s, body frame
  Vec3 accel = Vec3::Zero();  // specific force, m/s^2, body frame
};

struct WorldConstants {
  Vec3 gravity{0.0, 0.0, kStandardGravity};  // NED, down positive
  Vec3 mag_reference = Vec3::UnitX();
};

// G carries gravity, D the velocity-to-position coupling S_D = [[0,-1],[0,0]].
struct ConstantMatrices {
  SIM23Tangent G;
  SIM23Tangent D;

  static ConstantMatrices from(const WorldConstants& w);
  SIM23Tangent sum() const { return G + D; }
};

Mat2 coupling_block();

struct MeasurementBundle {
  std::optional<Vec3> pos;
  std::optional<Vec3> vel;
  std::optional<Vec3> mag;  // unit length when present
  double stamp = 0.0;
};

SE23 nav_to_group(const NavState& s);
NavState group_to_nav(const SE23& x);

SE23Tangent input_to_tangent(const ImuInput& u);

/// Xdot = XU + GX + DX - XD as a dense 5x5 matrix.
Mat5 truth_derivative(const SE23& x, const ImuInput& u, const WorldConstants& w);

/// One step with the input held constant over [0, dt]:
///   X+ = exp(dt(G+D)) X exp(dt(U-D)).
/// Left and right actions commute, so this is the exact flow of the
/// group-affine system for constant U. The scaling blocks cancel and the
/// product is projected back onto SE2(3).
SE23 propagate_truth(const SE23& x, const ImuInput& u, const WorldConstants& w, double dt);

struct CircleSample {
  NavState state;
  ImuInput input;
};

inline constexpr double kCircleRadius = 50.0;
inline constexpr double kCircleSpeed = 25.0;

/// Analytic circle of radius 50 m at 25 m/s, yawing at 1 rad/s.
CircleSample circle_reference(double t, const WorldConstants& w = {});

Vec3 measure_position(const SE23& x);
Vec3 measure_velocity(const SE23& x);
/// R^T * mag_reference, normalized.
Vec3 measure_magnetometer(const SE23& x, const WorldConstants& w);

struct ImuSample {
  double stamp = 0.0;
  ImuInput input;
};

struct GnssSample {
  double stamp = 0.0;
  Vec3 position = Vec3::Zero();
  std::optional<Vec3> velocity;
};

struct MagSample {
  double stamp = 0.0;
  Vec3 field = Vec3::UnitX();
};

struct FusedEvent {
  double stamp = 0.0;
  ImuInput imu;
  MeasurementBundle measurements;
};

/// One event per IMU sample carrying the latest GNSS and magnetometer values
/// stamped at or before it. Throws DataError on a non-increasing stamp in any
/// stream.
std::vector<FusedEvent> zoh_fuse(const std::vector<ImuSample>& imu,
                                 const std::vector<GnssSample>& gnss,
                                 const std::vector<MagSample>& mag);

}  // namespace syncnav
