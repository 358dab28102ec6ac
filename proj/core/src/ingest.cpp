#include "syncnav/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string_view>

#include "syncnav/errors.hpp"

namespace syncnav {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kUnitSlack = 8.0 * std::numeric_limits<double>::epsilon();

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void bad_row(std::size_t line_no, const std::string& what) {
  throw DataError("line " + std::to_string(line_no) + ": " + what);
}

double parse_number(std::string_view s, std::size_t line_no, const char* field) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    bad_row(line_no, std::string("bad value for ") + field + " '" + std::string(s) + "'");
  }
  return v;
}

Vec3 parse_triplet(const std::vector<std::string_view>& f, std::size_t first, std::size_t line_no) {
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    v(i) = parse_number(f[first + i], line_no, "field");
  }
  return v;
}

template <typename Sample>
void sort_dedupe(std::vector<Sample>& xs) {
  std::stable_sort(xs.begin(), xs.end(),
                   [](const Sample& a, const Sample& b) { return a.stamp < b.stamp; });
  std::vector<Sample> out;
  out.reserve(xs.size());
  for (const Sample& s : xs) {
    if (!out.empty() && out.back().stamp == s.stamp) {
      out.back() = s;
    } else {
      out.push_back(s);
    }
  }
  xs.swap(out);
}

Vec3 unit(const Vec3& v) {
  const double n2 = v.squaredNorm();
  if (std::abs(n2 - 1.0) <= kUnitSlack) return v;
  return v / std::sqrt(n2);
}

void put(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

void LlaFix::validate() const {
  if (!std::isfinite(latitude) || !std::isfinite(longitude) || !std::isfinite(altitude)) {
    throw std::invalid_argument("fix has non-finite coordinates");
  }
  if (std::abs(latitude) > 90.0) throw std::invalid_argument("latitude outside [-90, 90]");
  if (std::abs(longitude) > 180.0) throw std::invalid_argument("longitude outside [-180, 180]");
}

Vec3 default_mag_reference() { return Vec3(23.33, 5.19, -52.80).normalized(); }

namespace wgs84 {

double meridian_radius(double lat_deg) {
  const double s = std::sin(lat_deg * kDegToRad);
  const double w = 1.0 - kEccentricitySq * s * s;
  return kSemiMajor * (1.0 - kEccentricitySq) / (w * std::sqrt(w));
}

double normal_radius(double lat_deg) {
  const double s = std::sin(lat_deg * kDegToRad);
  return kSemiMajor / std::sqrt(1.0 - kEccentricitySq * s * s);
}

}  // namespace wgs84

Vec3 lla_to_ned(const LlaFix& ref, const LlaFix& fix) {
  ref.validate();
  fix.validate();
  const double rm = wgs84::meridian_radius(ref.latitude);
  const double rn = wgs84::normal_radius(ref.latitude);
  double dlon = fix.longitude - ref.longitude;
  if (dlon > 180.0) dlon -= 360.0;
  if (dlon < -180.0) dlon += 360.0;
  return {(fix.latitude - ref.latitude) * kDegToRad * rm,
          dlon * kDegToRad * rn * std::cos(ref.latitude * kDegToRad),
          ref.altitude - fix.altitude};
}

LlaFix ned_to_lla(const LlaFix& ref, const Vec3& ned) {
  ref.validate();
  const double rm = wgs84::meridian_radius(ref.latitude);
  const double rn = wgs84::normal_radius(ref.latitude);
  LlaFix out;
  out.latitude = ref.latitude + ned.x() / rm / kDegToRad;
  out.longitude = ref.longitude + ned.y() / (rn * std::cos(ref.latitude * kDegToRad)) / kDegToRad;
  out.altitude = ref.altitude - ned.z();
  return out;
}

LogBundle parse_log(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  LogBundle bundle;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string_view> f = split(line);
    if (!have_header) {
      if (f.size() < 8 || f[0] != "type" || f[1] != "stamp_s") {
        throw SchemaError("line " + std::to_string(line_no) +
                          ": expected header 'type,stamp_s,f1,f2,f3,f4,f5,f6'");
      }
      have_header = true;
      continue;
    }
    if (f.size() > 8) bad_row(line_no, "too many fields");
    std::vector<std::string_view> g(f);
    g.resize(8);
    const double stamp = parse_number(g[1], line_no, "stamp_s");

    if (g[0] == "IMU") {
      ImuSample s;
      s.stamp = stamp;
      s.input.omega = parse_triplet(g, 2, line_no);
      s.input.accel = parse_triplet(g, 5, line_no);
      bundle.imu.push_back(s);
    } else if (g[0] == "GNSS") {
      GnssRecord r;
      r.stamp = stamp;
      const Vec3 lla = parse_triplet(g, 2, line_no);
      r.fix = {lla.x(), lla.y(), lla.z(), stamp};
      try {
        r.fix.validate();
      } catch (const std::invalid_argument& e) {
        bad_row(line_no, e.what());
      }
      const int present = !g[5].empty() + !g[6].empty() + !g[7].empty();
      if (present == 3) {
        r.velocity_ned = parse_triplet(g, 5, line_no);
      } else if (present != 0) {
        bad_row(line_no, "velocity needs all of vn, ve, vd or none");
      }
      bundle.gnss.push_back(r);
    } else if (g[0] == "MAG") {
      MagSample m;
      m.stamp = stamp;
      const Vec3 raw = parse_triplet(g, 2, line_no);
      if (raw.norm() == 0.0) bad_row(line_no, "zero magnetometer vector");
      m.field = unit(raw);
      bundle.mag.push_back(m);
    } else {
      bad_row(line_no, "unknown row type '" + std::string(g[0]) + "'");
    }
  }
  if (!have_header) throw SchemaError("missing header row");
  if (bundle.imu.empty()) throw DataError("no imu samples");

  sort_dedupe(bundle.imu);
  sort_dedupe(bundle.gnss);
  sort_dedupe(bundle.mag);

  const double t0 = bundle.imu.front().stamp;
  for (auto& s : bundle.imu) s.stamp -= t0;
  for (auto& s : bundle.gnss) {
    s.stamp -= t0;
    s.fix.stamp = s.stamp;
  }
  for (auto& s : bundle.mag) s.stamp -= t0;
  return bundle;
}

LogBundle parse_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open log '" + path + "'");
  return parse_log(in);
}

void write_log(std::ostream& out, const LogBundle& bundle) {
  out << "type,stamp_s,f1,f2,f3,f4,f5,f6\n";
  auto row = [&](const char* type, double stamp, std::initializer_list<std::optional<double>> vals) {
    out << type << ',';
    put(out, stamp);
    int n = 0;
    for (const auto& v : vals) {
      out << ',';
      if (v) put(out, *v);
      ++n;
    }
    for (; n < 6; ++n) out << ',';
    out << '\n';
  };
  for (const ImuSample& s : bundle.imu) {
    const Vec3& w = s.input.omega;
    const Vec3& a = s.input.accel;
    row("IMU", s.stamp, {w.x(), w.y(), w.z(), a.x(), a.y(), a.z()});
  }
  for (const GnssRecord& r : bundle.gnss) {
    if (r.velocity_ned) {
      const Vec3& v = *r.velocity_ned;
      row("GNSS", r.stamp, {r.fix.latitude, r.fix.longitude, r.fix.altitude, v.x(), v.y(), v.z()});
    } else {
      row("GNSS", r.stamp, {r.fix.latitude, r.fix.longitude, r.fix.altitude});
    }
  }
  for (const MagSample& m : bundle.mag) {
    row("MAG", m.stamp, {m.field.x(), m.field.y(), m.field.z()});
  }
}

void write_log(const std::string& path, const LogBundle& bundle) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write log '" + path + "'");
  write_log(out, bundle);
}

std::vector<GnssSample> gnss_to_local(const std::vector<GnssRecord>& gnss, const LlaFix& origin) {
  std::vector<GnssSample> out;
  out.reserve(gnss.size());
  for (const GnssRecord& r : gnss) {
    out.push_back({r.stamp, lla_to_ned(origin, r.fix), r.velocity_ned});
  }
  return out;
}

}  // namespace syncnav
