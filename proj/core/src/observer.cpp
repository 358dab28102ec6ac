#include "syncnav/observer.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "syncnav/errors.hpp"

namespace syncnav {

namespace {

struct AuxView {
  Mat3 rzt;        // R_Z^T
  Mat2 ainv;       // A_Z^-1
  Mat32 vz;
  Mat2 a;
};

AuxView view(const SIM23& z) {
  const double det = z.ablock.determinant();
  if (!(std::abs(det) >= kDeterminantFloor)) throw SingularAuxiliaryError(det);
  return {z.rotation.matrix().transpose(), z.ablock.inverse(), z.vblock, z.ablock};
}

// Translation-type pair for a selected column: W_Delta and W_Gamma.
void add_translation(CorrectionPair& out, const AuxView& v, const Vec2& sel, const Vec3& y,
                     const Vec3& yhat, double k) {
  const Vec2 ac = v.ainv * sel;
  const Vec3 c = v.vz * ac;
  out.delta.wblock += k * v.rzt * (y - yhat) * ac.transpose();
  out.gamma.wblock += -k * v.rzt * (y - c) * ac.transpose();
}

Vec3 attitude_omega(const AuxView& v, const Vec2& sel, const Vec3& y, const Vec3& yhat, double k) {
  const Vec3 c = v.vz * (v.ainv * sel);
  return 4.0 * k * v.rzt * (yhat - c).cross(y - c);
}

Mat2 selector_block(const AuxView& v, const Vec2& sel) {
  const Vec2 ac = v.ainv * sel;
  return ac * ac.transpose();
}

}  // namespace

void Gains::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("gains: " + what); };
  if (!(k_p > 0.0)) fail("k_p must be positive");
  if (!(k_c > 0.0)) fail("k_c must be positive");
  if (!(k_v >= 0.0)) fail("k_v must be nonnegative");
  if (!(k_d >= 0.0)) fail("k_d must be nonnegative");
  if (!(k_m >= 0.0)) fail("k_m must be nonnegative");
  if (!K_q.allFinite() || std::abs(K_q(0, 1) - K_q(1, 0)) > 1e-12) fail("K_q must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat2> es(K_q);
  if (!(es.eigenvalues().minCoeff() > 0.0)) fail("K_q must be positive definite");
}

Gains preset_gains(std::string_view name) {
  Gains g;
  g.K_q = Vec2(10.0, 2.0).asDiagonal();
  g.k_p = 10.0;
  g.k_c = 0.1;
  const bool vel = name == "pv" || name == "pvm";
  const bool mag = name == "pm" || name == "pvm";
  if (!vel && !mag && name != "p") {
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
  }
  g.k_v = vel ? 10.0 : 0.0;
  g.k_d = vel ? 0.1 : 0.0;
  g.k_m = mag ? 2.0 : 0.0;
  return g;
}

Gains experiment_gains() {
  Gains g;
  g.K_q = Vec2(0.1, 0.02).asDiagonal();
  g.k_p = 1.0;
  g.k_c = 0.01;
  g.k_v = 1.0;
  g.k_d = 0.001;
  g.k_m = 2e-6;
  return g;
}

ObserverState ObserverState::zero() { return {}; }

ObserverState ObserverState::extreme() {
  ObserverState s;
  s.estimate.rotation = Rot3::exp(0.99 * std::numbers::pi * Vec3::UnitX());
  s.estimate.vblock.col(0) = Vec3(2.0, 27.0, 2.0);
  s.estimate.vblock.col(1) = Vec3(70.0, 20.0, 20.0);
  s.auxiliary.ablock = Vec2(2.0, 10.0).asDiagonal();
  s.auxiliary.vblock = s.estimate.vblock * s.auxiliary.ablock;
  return s;
}

CorrectionPair& CorrectionPair::operator+=(const CorrectionPair& o) {
  delta += o.delta;
  gamma += o.gamma;
  return *this;
}

CorrectionPair correction_pos_translation(const ObserverState& state, const Vec3& y_p,
                                          const Gains& gains) {
  const AuxView v = view(state.auxiliary);
  CorrectionPair out;
  add_translation(out, v, kSelectPosition, y_p, measure_position(state.estimate), gains.k_p);
  out.gamma.sblock = -0.5 * gains.k_p * selector_block(v, kSelectPosition) +
                     0.5 * v.a.transpose() * gains.K_q * v.a;
  return out;
}

CorrectionPair correction_pos_attitude(const ObserverState& state, const Vec3& y_p,
                                       const Gains& gains) {
  const AuxView v = view(state.auxiliary);
  const Vec3 yhat = measure_position(state.estimate);
  CorrectionPair out;
  out.delta.omega = attitude_omega(v, kSelectPosition, y_p, yhat, gains.k_c);
  add_translation(out, v, kSelectPosition, y_p, yhat, gains.k_c);
  return out;
}

CorrectionPair correction_velocity(const ObserverState& state, const Vec3& y_v,
                                   const Gains& gains) {
  const AuxView v = view(state.auxiliary);
  const Vec3 yhat = measure_velocity(state.estimate);
  CorrectionPair out;
  out.delta.omega = attitude_omega(v, kSelectVelocity, y_v, yhat, gains.k_d);
  add_translation(out, v, kSelectVelocity, y_v, yhat, gains.k_v + gains.k_d);
  out.gamma.sblock = -0.5 * gains.k_v * selector_block(v, kSelectVelocity);
  return out;
}

CorrectionPair correction_magnetometer(const ObserverState& state, const Vec3& y_m,
                                       const Vec3& mag_ref, double k_m) {
  const Vec3 ym = y_m.normalized();
  const Vec3 ref = mag_ref.normalized();
  CorrectionPair out;
  out.delta.omega = 4.0 * k_m * (state.auxiliary.rotation.transpose() *
                                 (state.estimate.rotation * ym).cross(ref));
  return out;
}

CorrectionPair combine(const std::vector<std::pair<CorrectionPair, double>>& weighted) {
  CorrectionPair total;
  for (const auto& [pair, alpha] : weighted) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("combine: negative weight");
    total += alpha * pair;
  }
  return total;
}

CorrectionPair compute_corrections(const ObserverState& state, const MeasurementBundle& m,
                                   const Gains& gains, const WorldConstants& w,
                                   CorrectionFault fault) {
  std::vector<std::pair<CorrectionPair, double>> terms;
  if (m.pos) {
    terms.emplace_back(correction_pos_translation(state, *m.pos, gains), 1.0);
    terms.emplace_back(correction_pos_attitude(state, *m.pos, gains), 1.0);
  }
  if (m.vel) terms.emplace_back(correction_velocity(state, *m.vel, gains), 1.0);
  if (m.mag) {
    terms.emplace_back(correction_magnetometer(state, *m.mag, w.mag_reference, gains.k_m), 1.0);
  }
  CorrectionPair c = combine(terms);
  if (fault == CorrectionFault::flip_wgamma) c.gamma.wblock = -c.gamma.wblock;
  return c;
}

ObserverState apply_correction(const ObserverState& state, const CorrectionPair& c, double dt) {
  const SIM23 gamma_back = exp_sim23(-dt * c.gamma);
  const SE23 kick =
      (gamma_back * exp_sim23(dt * (c.gamma + SIM23Tangent::from(c.delta)))).to_se23();
  ObserverState next;
  next.estimate = conjugate(state.auxiliary, kick) * state.estimate;
  next.estimate.rotation = next.estimate.rotation.renormalized();
  next.auxiliary = state.auxiliary * gamma_back;
  next.auxiliary.rotation = next.auxiliary.rotation.renormalized();
  return next;
}

ObserverState propagate_observer(const ObserverState& state, const ImuInput& u,
                                 const WorldConstants& w, double dt) {
  const ConstantMatrices cm = ConstantMatrices::from(w);
  const SIM23 left = exp_sim23(dt * cm.sum());
  const SIM23 right = exp_sim23(dt * (SIM23Tangent::from(input_to_tangent(u)) - cm.D));
  ObserverState next;
  next.estimate = (left * SIM23::from(state.estimate) * right).to_se23();
  next.estimate.rotation = next.estimate.rotation.renormalized();
  next.auxiliary = left * state.auxiliary;
  return next;
}

ObserverState observer_step(const ObserverState& state, const ImuInput& u, const CorrectionPair& c,
                            const WorldConstants& w, double dt) {
  return propagate_observer(apply_correction(state, c, dt), u, w, dt);
}

CorrectionPair attitude_part(const CorrectionPair& c) {
  CorrectionPair out;
  out.delta.omega = c.delta.omega;
  out.gamma.omega = c.gamma.omega;
  return out;
}

CorrectionPair translation_part(const CorrectionPair& c) {
  CorrectionPair out = c;
  out.delta.omega.setZero();
  out.gamma.omega.setZero();
  return out;
}

ObserverState observer_update(const ObserverState& state, const ImuInput& u,
                              const MeasurementBundle& m, const Gains& gains,
                              const WorldConstants& w, double dt, CorrectionFault fault) {
  const CorrectionPair first = compute_corrections(state, m, gains, w, fault);
  const ObserverState rotated = apply_correction(state, attitude_part(first), dt);
  const CorrectionPair second = compute_corrections(rotated, m, gains, w, fault);
  return propagate_observer(apply_correction(rotated, translation_part(second), dt), u, w, dt);
}

SE23 error_state(const SE23& x, const ObserverState& state) {
  const AuxView v = view(state.auxiliary);
  const Mat3 rz = v.rzt.transpose();
  const Mat3 re = v.rzt * x.rotation.matrix() * state.estimate.rotation.matrix().transpose() * rz;
  SE23 e;
  e.rotation = Rot3::unchecked(re);
  e.vblock = v.rzt * (x.vblock * v.a - v.vz) - re * v.rzt * (state.estimate.vblock * v.a - v.vz);
  return e;
}

double lyapunov(const SE23& ebar) {
  return 3.0 - ebar.rotation.trace() + ebar.vblock.squaredNorm();
}

double lyapunov_rate(const SE23& ebar, const CorrectionPair& c) {
  const Mat3& r = ebar.rotation.matrix();
  const Mat32& v = ebar.vblock;
  const double rot = (r * skew(c.delta.omega)).trace();
  const double scale = -2.0 * ((v.transpose() * v).cwiseProduct(c.gamma.sblock)).sum();
  const Mat32 drive = (Mat3::Identity() - r) * c.gamma.wblock - r * c.delta.wblock;
  return rot + scale + 2.0 * v.cwiseProduct(drive).sum();
}

SE23 error_flow(const SE23& ebar, const CorrectionPair& c, double t) {
  const SIM23 fwd = exp_sim23(t * c.gamma);
  const SIM23 back = exp_sim23(-t * (c.gamma + SIM23Tangent::from(c.delta)));
  return (fwd * SIM23::from(ebar) * back).to_se23();
}

double rotation_error_rate_identity(const Rot3& r, const Vec3& mu_hat, const Vec3& mu,
                                    const Vec3& delta, double k) {
  (void)mu_hat;
  const Mat3& m = r.matrix();
  const Vec3 e = (Mat3::Identity() - m * m) * mu;
  return -k * e.squaredNorm() + 2.0 * k * e.dot(delta);
}

}  // namespace syncnav
