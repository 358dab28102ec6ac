#pragma once

// Flight-log ingestion. One CSV file, discriminated by its first column:
//
//   type,stamp_s,f1,f2,f3,f4,f5,f6
//   IMU,<s>,gx,gy,gz,ax,ay,az         rad/s, m/s^2
//   GNSS,<s>,lat_deg,lon_deg,alt_m,vn,ve,vd   velocity fields may be empty
//   MAG,<s>,mx,my,mz,,,
//
// Streams are sorted, duplicate stamps keep the last row, magnetometer rows
// are normalized and all stamps are rebased so the first IMU sample is t = 0.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "syncnav/lie.hpp"
#include "syncnav/model.hpp"

namespace syncnav {

struct LlaFix {
  double latitude = 0.0;   // deg
  double longitude = 0.0;  // deg
  double altitude = 0.0;   // m
  double stamp = 0.0;

  /// Throws std::invalid_argument on non-finite values, |lat| > 90 or
  /// |lon| > 180.
  void validate() const;
};

struct GnssRecord {
  double stamp = 0.0;
  LlaFix fix;
  std::optional<Vec3> velocity_ned;
};

/// Field direction used when none is given: (23.33, 5.19, -52.80) uT, normalized.
Vec3 default_mag_reference();

struct LogBundle {
  std::vector<ImuSample> imu;
  std::vector<GnssRecord> gnss;
  std::vector<MagSample> mag;
  Vec3 mag_reference = default_mag_reference();
};

namespace wgs84 {
inline constexpr double kSemiMajor = 6378137.0;
inline constexpr double kFlattening = 1.0 / 298.257223563;
inline constexpr double kEccentricitySq = kFlattening * (2.0 - kFlattening);
double meridian_radius(double lat_deg);
double normal_radius(double lat_deg);
}  // namespace wgs84

/// Flat tangent-plane NED offset of fix from ref using WGS-84 curvature radii
/// at the reference latitude.
Vec3 lla_to_ned(const LlaFix& ref, const LlaFix& fix);
/// Inverse of lla_to_ned for the same reference.
LlaFix ned_to_lla(const LlaFix& ref, const Vec3& ned);

/// Throws SchemaError on a bad header, DataError (with the line number) on a
/// malformed row and DataError("no imu samples") when the IMU stream is empty.
LogBundle parse_log(std::istream& in);
LogBundle parse_log(const std::string& path);

/// Every number is written with 17 significant digits, so write then parse
/// reproduces the bundle bit for bit.
void write_log(std::ostream& out, const LogBundle& bundle);
void write_log(const std::string& path, const LogBundle& bundle);

/// GNSS records converted to local NED about origin.
std::vector<GnssSample> gnss_to_local(const std::vector<GnssRecord>& gnss, const LlaFix& origin);

}  // namespace syncnav
