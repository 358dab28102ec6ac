#pragma once

// Synchronous observer on SE2(3) with an auxiliary state on SIM2(3).
//
//   d/dt Xhat = Xhat U + (G + D) Xhat - Xhat D + Ad_Z(Delta) Xhat
//   d/dt Z    = (G + D) Z - Z Gamma
//
// The error Ebar = Z^-1 X Xhat^-1 Z obeys d/dt Ebar = Gamma Ebar - Ebar Gamma
// - Ebar Delta, so it is constant whenever both corrections vanish.

#include <string_view>
#include <utility>
#include <vector>

#include "syncnav/lie.hpp"
#include "syncnav/model.hpp"

namespace syncnav {

inline constexpr double kConditionAlarm = 1e6;

struct Gains {
  double k_p = 10.0;
  double k_c = 0.1;
  double k_v = 10.0;
  double k_d = 0.1;
  double k_m = 2.0;
  Mat2 K_q = Vec2(10.0, 2.0).asDiagonal();

  /// Throws std::invalid_argument when k_p or k_c is not positive, another
  /// scalar gain is negative, or K_q is not symmetric positive definite.
  void validate() const;
};

/// Simulation presets "p", "pv", "pm", "pvm". Throws std::invalid_argument
/// for any other name.
Gains preset_gains(std::string_view name);
/// Gains used for flight-log replay.
Gains experiment_gains();

// Output selectors picking the velocity and position columns of V.
inline const Vec2 kSelectVelocity{1.0, 0.0};
inline const Vec2 kSelectPosition{0.0, 1.0};

struct ObserverState {
  SE23 estimate;
  SIM23 auxiliary;

  double condition_number() const { return auxiliary.condition_number(); }
  bool conditioning_alarm() const { return condition_number() > kConditionAlarm; }

  /// Everything at identity or zero.
  static ObserverState zero();
  /// Attitude off by 0.99 pi about e1, v = (2, 27, 2), p = (70, 20, 20),
  /// A_Z = diag(2, 10), V_Z = Vhat A_Z.
  static ObserverState extreme();
};

struct CorrectionPair {
  SE23Tangent delta;
  SIM23Tangent gamma;

  CorrectionPair& operator+=(const CorrectionPair& o);
  friend CorrectionPair operator*(double s, const CorrectionPair& c) {
    return {s * c.delta, s * c.gamma};
  }
};

CorrectionPair correction_pos_translation(const ObserverState& state, const Vec3& y_p,
                                          const Gains& gains);
CorrectionPair correction_pos_attitude(const ObserverState& state, const Vec3& y_p,
                                       const Gains& gains);
CorrectionPair correction_velocity(const ObserverState& state, const Vec3& y_v,
                                   const Gains& gains);
/// Non-unit y_m or mag_ref are normalized first.
CorrectionPair correction_magnetometer(const ObserverState& state, const Vec3& y_m,
                                       const Vec3& mag_ref, double k_m);

/// Weighted sum; weights must be nonnegative.
CorrectionPair combine(const std::vector<std::pair<CorrectionPair, double>>& weighted);

// Test hook for mutation checks.
enum class CorrectionFault { none, flip_wgamma };

/// All four corrections with unit weight for each measurement present in m
/// and zero weight for each absent one.
CorrectionPair compute_corrections(const ObserverState& state, const MeasurementBundle& m,
                                   const Gains& gains, const WorldConstants& w,
                                   CorrectionFault fault = CorrectionFault::none);

/// Correction flow alone over dt with Delta and Gamma frozen:
///   Xhat+ = Z N Z^-1 Xhat,   Z+ = Z exp(-dt Gamma),
/// N = exp(-dt Gamma) exp(dt(Gamma+Delta)). The induced error update is
/// Ebar+ = exp(dt Gamma) Ebar exp(-dt(Gamma+Delta)).
ObserverState apply_correction(const ObserverState& state, const CorrectionPair& c, double dt);

/// Uncorrected flow over dt: Xhat+ = L Xhat P, Z+ = L Z with
/// L = exp(dt(G+D)), P = exp(dt(U-D)). Leaves Ebar unchanged.
ObserverState propagate_observer(const ObserverState& state, const ImuInput& u,
                                 const WorldConstants& w, double dt);

/// One step with u, Delta and Gamma frozen over dt:
///   Xhat+ = L (Z N Z^-1) Xhat P,   Z+ = L Z exp(-dt Gamma)
/// with L = exp(dt(G+D)), P = exp(dt(U-D)), N = exp(-dt Gamma) exp(dt(Gamma+Delta)).
/// The induced error update is Ebar+ = exp(dt Gamma) Ebar exp(-dt(Gamma+Delta)),
/// the exact flow of the error dynamics for frozen corrections.
ObserverState observer_step(const ObserverState& state, const ImuInput& u, const CorrectionPair& c,
                            const WorldConstants& w, double dt);

/// Rotational part of a pair (Omega_Delta, Omega_Gamma) and the rest.
CorrectionPair attitude_part(const CorrectionPair& c);
CorrectionPair translation_part(const CorrectionPair& c);

/// The step used by the drivers. Corrections from m are applied in two
/// stages at the start of the step: the attitude part first, then the
/// translation part recomputed at the rotated estimate, then the
/// uncorrected flow. With R_Ebar fixed during the translation stage the
/// V_Ebar update stays linear in V_Ebar.
ObserverState observer_update(const ObserverState& state, const ImuInput& u,
                              const MeasurementBundle& m, const Gains& gains,
                              const WorldConstants& w, double dt,
                              CorrectionFault fault = CorrectionFault::none);

/// Ebar = Z^-1 X Xhat^-1 Z from the closed-form blocks.
SE23 error_state(const SE23& x, const ObserverState& state);

/// tr(I - R_Ebar) + |V_Ebar|^2.
double lyapunov(const SE23& ebar);

/// Analytic derivative of lyapunov() along the error dynamics.
double lyapunov_rate(const SE23& ebar, const CorrectionPair& c);

/// exp(t Gamma) Ebar exp(-t(Gamma+Delta)); valid for negative t.
SE23 error_flow(const SE23& ebar, const CorrectionPair& c, double t);

/// d/dt tr(I - R) under Rdot = -2k R (mu_hat x mu)^x with mu = R mu_hat + delta:
///   -k |(I - R^2) mu|^2 + 2k <(I - R^2) mu, delta>.
double rotation_error_rate_identity(const Rot3& r, const Vec3& mu_hat, const Vec3& mu,
                                    const Vec3& delta, double k);

}  // namespace syncnav
