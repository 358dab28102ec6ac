#include "syncnav/model.hpp"

#include <cmath>
#include <sstream>

#include "syncnav/errors.hpp"

namespace syncnav {

Mat2 coupling_block() {
  Mat2 s;
  s << 0.0, -1.0, 0.0, 0.0;
  return s;
}

ConstantMatrices ConstantMatrices::from(const WorldConstants& w) {
  ConstantMatrices c;
  c.G.wblock.col(0) = w.gravity;
  c.D.sblock = coupling_block();
  return c;
}

SE23 nav_to_group(const NavState& s) {
  SE23 x;
  x.rotation = s.attitude;
  x.vblock.col(0) = s.velocity;
  x.vblock.col(1) = s.position;
  return x;
}

NavState group_to_nav(const SE23& x) { return {x.rotation, x.velocity(), x.position()}; }

SE23Tangent input_to_tangent(const ImuInput& u) {
  SE23Tangent xi;
  xi.omega = u.omega;
  xi.wblock.col(0) = u.accel;
  return xi;
}

Mat5 truth_derivative(const SE23& x, const ImuInput& u, const WorldConstants& w) {
  const ConstantMatrices c = ConstantMatrices::from(w);
  const Mat5 X = x.matrix();
  const Mat5 D = c.D.matrix();
  return X * input_to_tangent(u).matrix() + c.G.matrix() * X + D * X - X * D;
}

SE23 propagate_truth(const SE23& x, const ImuInput& u, const WorldConstants& w, double dt) {
  const ConstantMatrices c = ConstantMatrices::from(w);
  const SIM23 left = exp_sim23(dt * c.sum());
  const SIM23 right = exp_sim23(dt * (SIM23Tangent::from(input_to_tangent(u)) - c.D));
  SE23 next = (left * SIM23::from(x) * right).to_se23();
  next.rotation = next.rotation.renormalized();
  return next;
}

CircleSample circle_reference(double t, const WorldConstants& w) {
  const double rate = kCircleSpeed / kCircleRadius;
  const double c = std::cos(rate * t);
  const double s = std::sin(rate * t);
  CircleSample out;
  out.state.position = kCircleRadius * Vec3(c, s, 0.0);
  out.state.velocity = kCircleSpeed * Vec3(-s, c, 0.0);
  out.state.attitude = Rot3::exp(t * Vec3::UnitZ());
  const Vec3 vdot = -kCircleSpeed * rate * Vec3(c, s, 0.0);
  out.input.omega = Vec3::UnitZ();
  out.input.accel = out.state.attitude.transpose() * (vdot - w.gravity);
  return out;
}

Vec3 measure_position(const SE23& x) { return x.position(); }

Vec3 measure_velocity(const SE23& x) { return x.velocity(); }

Vec3 measure_magnetometer(const SE23& x, const WorldConstants& w) {
  return (x.rotation.transpose() * w.mag_reference).normalized();
}

namespace {

template <typename Sample>
void require_increasing(const std::vector<Sample>& xs, const char* name) {
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i].stamp > xs[i - 1].stamp)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << name << " stream is not increasing at stamp " << xs[i].stamp;
      throw DataError(msg.str());
    }
  }
}

}  // namespace

std::vector<FusedEvent> zoh_fuse(const std::vector<ImuSample>& imu,
                                 const std::vector<GnssSample>& gnss,
                                 const std::vector<MagSample>& mag) {
  require_increasing(imu, "imu");
  require_increasing(gnss, "gnss");
  require_increasing(mag, "mag");

  std::vector<FusedEvent> events;
  events.reserve(imu.size());
  std::size_t gi = 0;
  std::size_t mi = 0;
  for (const ImuSample& s : imu) {
    while (gi < gnss.size() && gnss[gi].stamp <= s.stamp) ++gi;
    while (mi < mag.size() && mag[mi].stamp <= s.stamp) ++mi;

    FusedEvent ev;
    ev.stamp = s.stamp;
    ev.imu = s.input;
    ev.measurements.stamp = s.stamp;
    if (gi > 0) {
      ev.measurements.pos = gnss[gi - 1].position;
      ev.measurements.vel = gnss[gi - 1].velocity;
    }
    if (mi > 0) {
      ev.measurements.mag = mag[mi - 1].field;
    }
    events.push_back(ev);
  }
  return events;
}

}  // namespace syncnav
